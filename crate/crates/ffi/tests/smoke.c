#include <stdio.h>
#include <string.h>
#include "covstar.h"

int main(void) {
    CovstarChart *chart = NULL;
    if (covstar_chart_fixture("moyal2", &chart) != COVSTAR_STATUS_OK) return 1;
    CovstarForm *a = NULL, *b = NULL;
    const char *x1 = "{\"type\": [0, 0], \"degree\": 0, \"components\": {\";;\": \"x1\"}}";
    const char *x2 = "{\"type\": [0, 0], \"degree\": 0, \"components\": {\";;\": \"x2\"}}";
    if (covstar_form_from_json(chart, x1, &a) != COVSTAR_STATUS_OK) return 2;
    if (covstar_form_from_json(chart, x2, &b) != COVSTAR_STATUS_OK) return 3;
    char *json = NULL;
    if (covstar_star_json(chart, a, b, 2, &json) != COVSTAR_STATUS_OK) return 4;
    printf("%s\n", json);
    covstar_string_free(json);
    CovstarChart *bad = NULL;
    if (covstar_chart_fixture("nope", &bad) != COVSTAR_STATUS_INPUT) return 5;
    if (covstar_last_error() == NULL) return 6;
    covstar_form_free(a);
    covstar_form_free(b);
    covstar_chart_free(chart);
    return 0;
}
