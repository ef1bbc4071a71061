import os, sys
from collections import OrderedDict

# Entry point.
def main(argv):
    """Run."""
    return len(argv)  # count

class Tool:
    def run(self):
        pass
