#include <stdio.h>
#include "confboost.h"

int main(void) {
    CbDataset *ds = NULL;
    CbModel *model = NULL;
    char *json = NULL;
    int8_t label = 0;
    double x[3] = {0.1, -0.2, 0.3};

    if (cb_dataset_synthetic(200, 3, 7, &ds) != CB_STATUS_OK) {
        fprintf(stderr, "%s\n", cb_last_error_message());
        return 1;
    }
    if (cb_train_plain(ds, CB_BASE_RLC, 20, 1, &model) != CB_STATUS_OK) {
        fprintf(stderr, "%s\n", cb_last_error_message());
        cb_dataset_free(ds);
        return 1;
    }
    cb_model_predict(model, x, 3, &label);
    cb_model_to_json(model, &json);
    printf("%zu classifiers, label %d, %zu records\n", cb_model_len(model), label, cb_dataset_n(ds));
    cb_string_free(json);
    cb_model_free(model);
    cb_dataset_free(ds);
    return 0;
}
