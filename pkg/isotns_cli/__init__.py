"""
Command-line interface for isotns.
"""
