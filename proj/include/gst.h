/* C API for the group-sequential trial toolkit.
 *
 * All functions return a gst_status; on failure a thread-local message is
 * available via gst_last_error(). Strings returned through char** out
 * parameters are heap-allocated and must be released with gst_string_free().
 */
#ifndef GST_H
#define GST_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gst_status {
  GST_OK = 0,
  GST_ERR_INVALID = 1,   /* bad argument or numeric failure */
  GST_ERR_CONFIG = 2,    /* config/schema validation failure */
  GST_ERR_CONTRACT = 3,  /* monitoring contract violation */
} gst_status;

typedef struct gst_design gst_design;  /* design + boundary table + trial model */
typedef struct gst_course gst_course;  /* live trial course */

const char* gst_last_error(void);
void gst_string_free(char* s);

/* ---- design ---- */

/* Builds the design from a JSON configuration document: derives the maximum
 * event count, boundary table and predicted schedule. */
gst_status gst_design_from_config(const char* config_json, gst_design** out);
void gst_design_free(gst_design* design);

gst_status gst_design_boundary_csv(const gst_design* design, char** out);
gst_status gst_design_table_text(const gst_design* design, char** out);
gst_status gst_design_schedule_csv(const gst_design* design, char** out);

/* ---- monitoring ---- */

gst_status gst_course_new(const gst_design* design, gst_course** out);
gst_status gst_course_from_json(const char* json, gst_course** out);
void gst_course_free(gst_course* course);
gst_status gst_course_to_json(const gst_course* course, char** out);

/* record_json: {"label", "ccod", "ssd", "observed_events",
 *               "observed_hr" or "observed_z", "overrule_futility"}.
 * printout summarises recalculated bounds, decision and designations. */
gst_status gst_course_record(gst_course* course, const char* record_json,
                             char** printout);

gst_status gst_course_report(const gst_course* course, char** out);

/* ---- simulation ---- */

/* sim_json: {"hr_true", "n_trials", "seed", "honor_futility",
 *            "overrun_fraction", "threads", "per_trial_csv"}.
 * oc_text receives the operating-characteristics summary; trials_csv (may be
 * NULL) receives one row per trial when per_trial_csv is true. */
gst_status gst_simulate(const gst_design* design, const char* sim_json,
                        char** oc_text, char** trials_csv);

#ifdef __cplusplus
}
#endif

#endif /* GST_H */
