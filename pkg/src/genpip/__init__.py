"""genpip: chunk-pipelined read mapping with early rejection, plus an
analytical timing/energy simulator of the staged architecture."""

__version__ = "0.1.0"
