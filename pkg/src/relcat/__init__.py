"""Desk-scale laboratory for effective categoricity constructions on graphs.

Modules:
  approx     — limit-set truth tables, stage moduli, pairing and set coding
  structures — graph views and automorphism-orbit machinery
  coding     — stage graphs, the symbolic limit graph, scrambles
  formulas   — existential formulas: evaluation, enumeration, searches
  scott      — orbit-defining families, condition checks, back-and-forth
  degree_lab — rejection enumeration E and the decoding procedures
"""

__version__ = "0.1.0"
