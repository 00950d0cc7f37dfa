def t():
    return False
