#include <stdio.h>
#include <string.h>
#include "intval.h"

static int fail(const char *what) {
    const char *msg = ivp_last_error_message();
    fprintf(stderr, "%s: %s\n", what, msg ? msg : "(no message)");
    return 1;
}

int main(void) {
    char *d = NULL;
    if (ivp_fixed_divisor("[0,-1,1]", &d) != IVP_STATUS_OK) return fail("fixdiv");
    if (strcmp(d, "2") != 0) return fail("fixdiv value");
    ivp_string_free(d);

    bool member = false;
    if (ivp_is_member("[0,1]/2", &member) != IVP_STATUS_OK || member) return fail("member");

    uint32_t lengths[] = {2, 3};
    IvpArtifact *a = NULL;
    if (ivp_construct_lengths(lengths, 2, 0, &a) != IVP_STATUS_OK) return fail("construct");
    size_t degree = 0;
    ivp_artifact_degree(a, &degree);
    size_t got[4];
    size_t count = 0;
    ivp_artifact_lengths(a, got, 4, &count);
    if (degree != 11 || count != 2 || got[0] != 2 || got[1] != 3) return fail("shape");

    char *json = NULL;
    if (ivp_artifact_to_json(a, &json) != IVP_STATUS_OK) return fail("to_json");
    IvpArtifact *b = NULL;
    if (ivp_artifact_from_json(json, &b) != IVP_STATUS_OK) return fail("from_json");
    size_t failed = 99;
    if (ivp_artifact_verify(b, &failed) != IVP_STATUS_OK || failed != 0) return fail("verify");
    ivp_string_free(json);
    ivp_artifact_free(a);
    ivp_artifact_free(b);

    uint32_t bad[] = {1, 2};
    if (ivp_construct_lengths(bad, 2, 0, &a) != IVP_STATUS_INVALID_ARGUMENT) return fail("bad lengths");
    if (ivp_last_error_message() == NULL) return fail("missing message");

    printf("ok\n");
    return 0;
}
