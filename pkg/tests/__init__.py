"""
SocLearn - Test Suite
"""
