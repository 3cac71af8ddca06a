#include <math.h>
#include <stdio.h>
#include <string.h>

#include "wbrier.h"

#define CHECK(cond)                                                        \
  do {                                                                     \
    if (!(cond)) {                                                         \
      fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond,       \
              wb_last_error());                                            \
      return 1;                                                            \
    }                                                                      \
  } while (0)

int main(void) {
  const double risks[] = {0.1, 0.4, 0.7, 0.9};
  const uint8_t outcomes[] = {0, 1, 0, 1};
  WbDataset *data = NULL;
  WbWeight *uniform = NULL;
  WbWeight *bad = NULL;
  double value = 0.0;

  CHECK(wb_dataset_new(risks, outcomes, 4, &data) == WB_STATUS_OK);
  CHECK(wb_weight_parse("uniform", &uniform) == WB_STATUS_OK);
  CHECK(wb_weighted_brier(data, uniform, &value) == WB_STATUS_OK);
  CHECK(fabs(value - 0.10875) < 1e-12);
  CHECK(wb_auc(data, &value) == WB_STATUS_OK);
  CHECK(value == 0.75);

  CHECK(wb_weight_parse("beta:0,1", &bad) == WB_STATUS_INVALID_ARGUMENT);
  CHECK(bad == NULL);
  CHECK(strlen(wb_last_error()) > 0);

  wb_weight_free(uniform);
  wb_dataset_free(data);
  printf("wbrier %s ok\n", wb_version());
  return 0;
}
