def init():
    a = b = 7
    return a + b
