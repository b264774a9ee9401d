Happy -> 1
Happy?1.Happy -> 0
default: fail
