"""
Level Set Laboratory - Source Package
"""
