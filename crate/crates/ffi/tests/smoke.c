#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "fluxmap.h"

static char *slurp(const char *path) {
    FILE *f = fopen(path, "rb");
    if (!f) return NULL;
    fseek(f, 0, SEEK_END);
    long n = ftell(f);
    fseek(f, 0, SEEK_SET);
    char *buf = malloc((size_t)n + 1);
    size_t got = fread(buf, 1, (size_t)n, f);
    buf[got] = '\0';
    fclose(f);
    return buf;
}

int main(int argc, char **argv) {
    if (argc != 3) return 2;
    char *blif = slurp(argv[1]);
    char *genlib = slurp(argv[2]);
    if (!blif || !genlib) return 2;

    FmLibrary *lib = NULL;
    FmNetlist *net = NULL;
    FmResult *res = NULL;
    if (fm_library_from_genlib(genlib, NULL, &lib) != FM_STATUS_OK) return 3;
    if (fm_netlist_from_blif(blif, &net) != FM_STATUS_OK) return 4;

    FmMapOptions opts = fm_map_options_default();
    opts.verify = true;
    if (fm_map(net, lib, &opts, &res) != FM_STATUS_OK) {
        fprintf(stderr, "%s\n", fm_last_error_message());
        return 5;
    }
    FmStats phase1, final_stats;
    if (fm_result_stats(res, &phase1, &final_stats) != FM_STATUS_OK) return 6;
    char *text = NULL;
    if (fm_result_blif(res, &text) != FM_STATUS_OK || !strstr(text, ".gate")) return 7;
    printf("depth=%u dffs=%llu psd=%g\n", final_stats.logical_depth,
           (unsigned long long)final_stats.dff_count, final_stats.psd);
    fm_string_free(text);

    FmNetlist *bad = NULL;
    if (fm_netlist_from_blif(".model x\n.bogus\n", &bad) != FM_STATUS_PARSE_ERROR) return 8;
    if (bad != NULL || fm_last_error_message() == NULL) return 9;

    fm_result_free(res);
    fm_netlist_free(net);
    fm_library_free(lib);
    free(blif);
    free(genlib);
    return 0;
}
