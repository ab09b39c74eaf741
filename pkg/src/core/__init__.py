"""
Core components: grid fields, shapes, evolution, level surfaces, Gaussian areas,
configuration, reports and the run ledger
"""
