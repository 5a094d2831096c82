"""Typed errors raised while turning CSV files into figures."""


class PlotError(Exception):
    """Base class for all rendering failures."""


class MissingColumn(PlotError):
    """A column the figure kind requires is absent from an input CSV."""


class EmptyInput(PlotError):
    """An input CSV parses but contains no data rows (or no bytes at all)."""
