"""Sliding-window convergence detection for the stage switch."""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Deque, List, Optional

logger = logging.getLogger(__name__)


@dataclass
class ConvergenceConfig:
    """Configuration for convergence detection."""
    window: int = 100  # Steps per running-mean window
    threshold: float = 0.01  # Relative improvement counted as a plateau
    max_steps: int = 200  # Hard cap regardless of progress
    patience: int = 1  # Consecutive below-threshold window comparisons required


class Convergence_Monitor:
    """
    Decides when a loss has stopped improving.

    Losses are averaged over consecutive windows; the run counts as
    converged when the relative drop between neighbouring window means
    stays below the threshold for ``patience`` comparisons in a row, or when
    the step cap is reached. ``patience`` counts comparisons, not windows:
    the default of 1 settles on the first pair of consecutive windows whose
    means differ by less than the threshold, and ``patience=k`` needs k + 1
    windows.
    """

    def __init__(self, config: Optional[ConvergenceConfig] = None):
        """Initialize the monitor.

        Args:
            config: Convergence settings
        """
        self.config = config or ConvergenceConfig()
        self._current: Deque[float] = deque()
        self._window_means: List[float] = []
        self._plateaus = 0
        self.steps = 0
        self.reason: Optional[str] = None

    @property
    def window_means(self) -> List[float]:
        return list(self._window_means)

    @property
    def converged(self) -> bool:
        return self.reason is not None

    def update(self, loss: float) -> bool:
        """Record one step's loss.

        Args:
            loss: Loss value of the step

        Returns:
            bool: True once convergence (or the cap) has been reached
        """
        if self.converged:
            return True

        self.steps += 1
        self._current.append(float(loss))

        if len(self._current) == self.config.window:
            mean = sum(self._current) / len(self._current)
            self._current.clear()
            if self._window_means:
                previous = self._window_means[-1]
                improvement = (previous - mean) / previous if previous > 0 else 0.0
                if improvement < self.config.threshold:
                    self._plateaus += 1
                else:
                    self._plateaus = 0
                logger.debug("Window mean %.6g, relative improvement %.4f", mean, improvement)
            self._window_means.append(mean)

            if self._plateaus >= self.config.patience:
                self.reason = "plateau"
                logger.info("Loss converged after %d steps", self.steps)
                return True

        if self.steps >= self.config.max_steps:
            self.reason = "step cap"
            logger.info("Step cap of %d reached before convergence", self.config.max_steps)
            return True

        return False
