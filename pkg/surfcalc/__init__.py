"""
__init_.py file for surfcalc package

Combinatorial computations for infinite-type surfaces: end spaces, principal
exhaustions, pants decompositions, handle-shift bases and the first cohomology
of pure mapping class groups.
"""

__author__ = "Joe Yesselman"
__email__ = "jyesselm@unl.edu"
__version__ = "1.0.0"
