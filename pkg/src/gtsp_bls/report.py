from __future__ import annotations

from dataclasses import dataclass, field

from .tour import Tour, format_tour


def compute_dev(f_avg: float, best: int) -> float:
    """Percentage gap ``100 * (f_avg - best) / best``."""
    if best <= 0:
        raise ValueError(f"best must be positive, got {best}")
    return 100.0 * (f_avg - best) / best


@dataclass
class RunReport:
    instance: str
    seed: int
    cost: int
    best_known: int | None
    wall_time: float
    generations: int
    descents: int
    n: int = 0
    m: int = 0
    tour: Tour | None = field(default=None, repr=False)
    best_per_generation: list[int] = field(default_factory=list, repr=False)

    @property
    def dev(self) -> float | None:
        if self.best_known is None:
            return None
        return compute_dev(self.cost, self.best_known)

    @property
    def tour_text(self) -> str:
        return format_tour(self.tour) if self.tour is not None else ""
