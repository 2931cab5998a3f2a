import logging
from typing import Iterable

from rich.console import Console
from rich.logging import RichHandler

LOGGER_NAME = "qmoments"


def setup_logging(level: int = logging.INFO, console: Console | None = None) -> logging.Logger:
    """Install one RichHandler on the qmoments logger tree."""
    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(level)
    for handler in list(logger.handlers):
        if isinstance(handler, RichHandler):
            logger.removeHandler(handler)
    handler = RichHandler(console=console or Console(stderr=True), show_path=False,
                          rich_tracebacks=True, markup=False)
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    logger.addHandler(handler)
    return logger


class Logs:
    """Console sink for reports and run summaries."""

    def __init__(self, console: Console | None = None, highlight: bool = True):
        self.console = console or Console()
        self.highlight = highlight

    def write(self, text: str):
        self.console.print(text, highlight=self.highlight, markup=False, soft_wrap=True)

    def stream(self, lines: Iterable[str]) -> int:
        """Write lines as they are produced; returns how many were written."""
        count = 0
        for line in lines:
            self.write(line)
            count += 1
        return count
