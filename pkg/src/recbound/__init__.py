"""Upper bounds for recursive equations in basis-bound abstract domains.

The main entry points are :func:`recbound.engine.analyze` for Seq
equations, :func:`recbound.piecewise.analyze_pw` for piecewise ones and
the ``recbound`` command line tool.
"""

__version__ = "0.1.0"
