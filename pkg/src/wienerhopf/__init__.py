"""Numerical toolkit for first-kind Wiener-Hopf equations with degenerate symbols.

Modules
-------
kernel    kernels at levels K, K1, K0; moments; admissibility conditions
symbol    symbols b, d, a and their regular factors; winding indices
classify  four-case classification and solvability reports
spaces    the operators B and G on grid functions; membership tests
solver    Nyström discretization with TSVD / Tikhonov regularization
pipeline  end-to-end analysis behind the command line
"""

__version__ = "0.1.0"
