None evens(None n) {
    None c;
    long i;
    c = 0;
    for (i = 0; i < n; i += 2) {
        c += 1;
    }
    return c;
}
