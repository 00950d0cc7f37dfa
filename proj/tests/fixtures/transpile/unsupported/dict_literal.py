def f():
    d = {1: 2}
    return 0
