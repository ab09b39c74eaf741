"""
Singular point analysis: classification, Lojasiewicz verdicts and flowlines
"""
