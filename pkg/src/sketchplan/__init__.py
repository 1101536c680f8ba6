"""Sketch-to-plan mission toolkit.

Draw preferred paths over a roadmap, compose a graphical temporal-logic
specification, and get a plan that satisfies the specification while
following the sketches where it validly can.
"""

__version__ = "0.1.0"
