def f(x):
    try:
        return g(x)
    except ValueError:
        return 0
