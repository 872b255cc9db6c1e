"""
CLI tests package.
"""