#ifndef SLH_H
#define SLH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 How a run ended.
 */
typedef enum SlhOutcome {
  SLH_OUTCOME_TERMINATED = 0,
  SLH_OUTCOME_STUCK = 1,
  SLH_OUTCOME_FUEL_EXHAUSTED = 2,
  SLH_OUTCOME_DIRECTIVES_EXHAUSTED = 3,
} SlhOutcome;

/*
 Result code of every call.
 */
typedef enum SlhStatus {
  /*
   Success; for checks, the property holds.
   */
  SLH_STATUS_OK = 0,
  /*
   The checked property is violated.
   */
  SLH_STATUS_VIOLATED = 1,
  SLH_STATUS_NULL_ARGUMENT = 2,
  SLH_STATUS_INVALID_UTF8 = 3,
  SLH_STATUS_PARSE_ERROR = 4,
  SLH_STATUS_FORMAT_ERROR = 5,
  SLH_STATUS_UNKNOWN_VARIANT = 6,
  SLH_STATUS_HARDEN_ERROR = 7,
  SLH_STATUS_CHECK_ERROR = 8,
  SLH_STATUS_UNKNOWN_LISTING = 9,
  /*
   The library panicked; this is a bug.
   */
  SLH_STATUS_INTERNAL = 10,
} SlhStatus;

/*
 A labeling; names it does not mention are secret.
 */
typedef struct SlhLabeling SlhLabeling;

/*
 A parsed program.
 */
typedef struct SlhProgram SlhProgram;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. The pointer
 stays valid until the next call on the same thread.
 */
const char *slh_last_error(void);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and not have been freed.
 */
void slh_string_free(char *s);

/*
 Parses program text.

 # Safety
 `source` must be a NUL-terminated string; `out` must be writable.
 */
enum SlhStatus slh_program_parse(const char *source, struct SlhProgram **out);

/*
 # Safety
 `p` must come from this library and not have been freed. Null is ignored.
 */
void slh_program_free(struct SlhProgram *p);

/*
 Number of command nodes, or 0 for null.

 # Safety
 `p` must be null or a live program handle.
 */
size_t slh_program_size(const struct SlhProgram *p);

/*
 Pretty-prints a program.

 # Safety
 `p` must be a live program handle; `out` must be writable.
 */
enum SlhStatus slh_program_print(const struct SlhProgram *p, char **out);

/*
 Parses a labeling file (`name: public` per line).

 # Safety
 `source` must be a NUL-terminated string; `out` must be writable.
 */
enum SlhStatus slh_labeling_parse(const char *source, struct SlhLabeling **out);

/*
 A labeling under which every name is secret.
 */
struct SlhLabeling *slh_labeling_all_secret(void);

/*
 # Safety
 `l` must come from this library and not have been freed. Null is ignored.
 */
void slh_labeling_free(struct SlhLabeling *l);

/*
 Hardens a program. `variant` is one of `none`, `islh`, `sislh`,
 `sislh-no-store-mask`, `fislh`, `uslh`, `svslh`, `fvslh`, `fsfvslh`.
 A null `labels` means all secret; a null `flag_var` means `b`.

 # Safety
 Pointers must be null where allowed or valid; `out` must be writable.
 */
enum SlhStatus slh_harden(const struct SlhProgram *p,
                          const struct SlhLabeling *labels,
                          const char *variant,
                          const char *flag_var,
                          struct SlhProgram **out);

/*
 Runs a program and returns its trace as text, one observation per line.
 `semantics` is `seq`, `spec`, `ideal-fislh`, `ideal-fvslh` or `ideal-fs`;
 `directives` is ignored by `seq`. A null `labels` means all secret.

 # Safety
 Pointers must be null where allowed or valid; out-parameters must be
 writable.
 */
enum SlhStatus slh_run(const struct SlhProgram *p,
                       const struct SlhLabeling *labels,
                       const char *semantics,
                       const char *state,
                       const char *directives,
                       bool misspeculating,
                       size_t fuel,
                       enum SlhOutcome *out_outcome,
                       char **out_trace);

/*
 Bounded relative security of `variant` applied to the program over a
 state space. Returns `Ok` when it holds and `Violated` otherwise; the
 report describes the verdict and any witness.

 # Safety
 Pointers must be null where allowed or valid; `out_report` must be
 writable.
 */
enum SlhStatus slh_check_relsec(const struct SlhProgram *p,
                                const struct SlhLabeling *labels,
                                const char *space,
                                const char *variant,
                                const char *flag_var,
                                size_t max_dirs,
                                size_t fuel,
                                char **out_report);

/*
 Bounded speculative constant time of the program as given.

 # Safety
 Pointers must be null where allowed or valid; `out_report` must be
 writable.
 */
enum SlhStatus slh_check_sct(const struct SlhProgram *p,
                             const struct SlhLabeling *labels,
                             const char *space,
                             size_t max_dirs,
                             size_t fuel,
                             char **out_report);

/*
 Replays the headline result of reference listing `listing` (1 to 6).

 # Safety
 `out_report` must be writable.
 */
enum SlhStatus slh_repro(uint32_t listing, char **out_report);

/*
 Whether `variant` names a hardening pass this library knows.

 # Safety
 `variant` must be null or a NUL-terminated string.
 */
bool slh_variant_known(const char *variant);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SLH_H */
