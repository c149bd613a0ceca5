#include <stdio.h>
#include <string.h>

#include "qchop.h"

#define CHECK(cond)                                                   \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "%s:%d: check failed: %s\n", __FILE__, __LINE__, \
              #cond);                                                 \
      return 1;                                                       \
    }                                                                 \
  } while (0)

int main(void) {
  QchopInstance *instance = NULL;
  QchopStatus status = qchop_instance_generate(QCHOP_PROBLEM_KIND_MIS, 4, 5, &instance);
  if (status != QCHOP_STATUS_OK) {
    fprintf(stderr, "%s: %s\n", qchop_status_name(status), qchop_last_error_message());
    return 1;
  }
  CHECK(qchop_instance_num_vars(instance) == 4);
  CHECK(qchop_instance_dimension(instance) == 16);

  QchopOracle oracle;
  CHECK(qchop_instance_oracle(instance, &oracle) == QCHOP_STATUS_OK);
  CHECK(oracle.optimal_count >= 1 && oracle.e_best < oracle.e_worst);

  QchopRunOptions options;
  CHECK(qchop_run_options_default(&options) == QCHOP_STATUS_OK);
  options.runtime = QCHOP_RUNTIME_FIXED;
  options.total_time = 30.0;
  options.checkpoints = 5;

  QchopReport *report = NULL;
  CHECK(qchop_run(instance, &options, &report) == QCHOP_STATUS_OK);
  CHECK(qchop_report_len(report) == 5);
  QchopCheckpoint last;
  CHECK(qchop_report_checkpoint(report, 4, &last) == QCHOP_STATUS_OK);
  CHECK(last.t == 30.0 && last.p_opt <= last.p_feas + 1e-12);
  printf("r=%.6f p_opt=%.6f\n", last.r, last.p_opt);

  CHECK(qchop_report_checkpoint(report, 9, &last) == QCHOP_STATUS_INVALID_ARGUMENT);
  QchopInstance *broken = NULL;
  CHECK(qchop_instance_from_json("{", NULL, &broken) == QCHOP_STATUS_MALFORMED);
  CHECK(broken == NULL);
  CHECK(strlen(qchop_last_error_message()) > 0);
  CHECK(strcmp(qchop_status_name(QCHOP_STATUS_MALFORMED), "QCHOP_STATUS_MALFORMED") == 0);

  qchop_report_free(report);
  qchop_instance_free(instance);
  return 0;
}
