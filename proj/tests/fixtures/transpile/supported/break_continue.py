def first_multiple(n, k):
    for i in range(1, n):
        if i % k != 0:
            continue
        return i
    while True:
        break
    return 0
