def f():
    global counter
    counter += 1
