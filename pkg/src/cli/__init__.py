"""
Command line application and scenario files
"""
