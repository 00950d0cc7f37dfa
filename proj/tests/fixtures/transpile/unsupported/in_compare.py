def f(x, xs):
    return x in xs
