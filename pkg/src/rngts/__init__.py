"""rngts: a statistical test battery for random number generators.

Engines and adapters live in `rngts.genkit`, the statistical backends in
`rngts.stats`, the test catalog in `rngts.battery`, second-order testing
in `rngts.meta`, reporting in `rngts.report`, and orchestration plus the
command line in `rngts.runner` / `rngts.cli`.
"""

__version__ = "0.1.0"
