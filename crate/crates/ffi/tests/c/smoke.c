#include <stdio.h>
#include <string.h>

#include "trustfilter.h"

int main(void) {
    const double table[10] = {0.1, 0.1, 0.2, 0.4, 0.4, 0.4, 0.6, 0.6, 0.8, 1.0};
    TfRecommendationSet *set = NULL;
    TfVerdict *verdict = NULL;
    double classes[10];
    size_t n = 0;
    double trust = 0.0;

    if (tf_recommendation_set_new(table, 10, &set) != TF_STATUS_OK) return 1;
    if (tf_filter_run(set, TF_FILTER_KIND_DEVIATION, NULL, &verdict) != TF_STATUS_OK) return 2;
    if (tf_verdict_dishonest_classes(verdict, classes, 10, &n) != TF_STATUS_OK) return 3;
    if (tf_verdict_trust(verdict, &trust) != TF_STATUS_OK) return 4;
    printf("classes=%zu %.1f %.1f surviving=%zu trust=%.4f\n", n, classes[0], classes[1],
           tf_verdict_surviving_count(verdict), trust);
    tf_verdict_free(verdict);
    tf_recommendation_set_free(set);

    const double bad = 1.5;
    if (tf_recommendation_set_new(&bad, 1, &set) != TF_STATUS_OUT_OF_RANGE) return 5;
    if (strlen(tf_last_error_message()) == 0) return 6;
    return 0;
}
