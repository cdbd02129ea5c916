"""Penalty selection by minimizing an analytic upper bound of the LNML code length."""
