#include <stdio.h>
#include <string.h>
#include "kemmer.h"

int main(void) {
    KemmerRep *rep = NULL;
    size_t dim = 0;
    double res = 1.0;
    if (kemmer_rep_new(1, &rep) != KEMMER_STATUS_OK) return 1;
    if (kemmer_rep_dimension(rep, &dim) != KEMMER_STATUS_OK || dim != 10) return 2;
    if (kemmer_rep_verify(rep, &res) != KEMMER_STATUS_OK || res > 1e-12) return 3;
    kemmer_rep_free(rep);

    if (kemmer_rep_new(7, &rep) != KEMMER_STATUS_INVALID_CONFIG) return 4;
    if (strstr(kemmer_last_error(), "spin") == NULL) return 5;

    KemmerNrField *f = NULL;
    double c[3] = {0, 0, 0}, k[3] = {0.5, 0, 0}, eps[6] = {1, 0, 0, 1, 0, 0};
    if (kemmer_nr_gaussian(1, 1.0, 1.0, c, k, eps, &f) != KEMMER_STATUS_OK) {
        fprintf(stderr, "%s\n", kemmer_last_error());
        return 6;
    }
    double v[3], rho;
    if (kemmer_nr_velocity(f, 0.0, c, v, &rho) != KEMMER_STATUS_OK) return 7;
    kemmer_nr_field_free(f);
    printf("v = %.6f %.6f %.6f\n", v[0], v[1], v[2]);
    return 0;
}
