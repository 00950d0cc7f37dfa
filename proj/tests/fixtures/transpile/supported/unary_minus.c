None neg(None x) {
    return -(x + 1);
}
