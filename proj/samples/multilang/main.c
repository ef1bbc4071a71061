#include <stdio.h>
#include "util/strbuf.h"
#define MAX 10

/* Counts words. */
static int count(const char *s) {
    int n = 0; // running total
    while (*s) { if (*s++ == ' ') n++; }
    return n;
}

struct point { int x, y; };

int main(void) {
    printf("%d\n", count("a b c"));
    return 0;
}
