def total(a, b):
    acc = 0
    for k in range(a, b):
        acc += k
    return acc
