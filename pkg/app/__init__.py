"""treeclasp: tree diagrams, claspers and tree-level gluing"""

__version__ = "0.1.0"
