def evens(n):
    c = 0
    for i in range(0, n, 2):
        c += 1
    return c
