import math
import os, sys


def area(r):
    # circle area
    return math.pi * r * r
