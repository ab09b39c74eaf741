"""
Test Suite for the Level Set Laboratory
"""
