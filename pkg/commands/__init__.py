"""Commands package - one module per CLI subcommand."""

from commands import baseline, fit, pnm_demo, predict, simulate, summarize

SUBCOMMANDS = (simulate, fit, summarize, predict, baseline, pnm_demo)

__all__ = ["SUBCOMMANDS"]
