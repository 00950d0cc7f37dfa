None between(None lo, None x, None hi) {
    return (lo <= x) && (x < hi);
}
