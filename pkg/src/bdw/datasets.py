"""Bundled example datasets.

Two small bivariate count datasets ship with the package so every fitting
command can be exercised without external files.

``football``: 26 match records from a season of a European club football
competition where both the home team scored and the match had a kick goal;
the first coordinate counts goals scored after the first kick goal of the
match and the second counts goals scored after the first goal of any kind,
so ties occur whenever the first goal was a kick goal.

``nasal``: 30 patients' nasal drainage severity scores (0–3) on two
consecutive days of a common-cold study.
"""

from __future__ import annotations

FOOTBALL_PAIRS: tuple[tuple[int, int], ...] = (
    (1, 2),
    (0, 0),
    (1, 1),
    (2, 2),
    (1, 1),
    (0, 1),
    (1, 1),
    (3, 2),
    (1, 1),
    (2, 1),
    (1, 2),
    (3, 3),
    (0, 1),
    (1, 2),
    (1, 1),
    (1, 3),
    (3, 3),
    (0, 1),
    (1, 1),
    (1, 2),
    (1, 0),
    (3, 0),
    (1, 2),
    (1, 1),
    (0, 1),
    (0, 1),
)

NASAL_PAIRS: tuple[tuple[int, int], ...] = (
    (1, 1),
    (0, 0),
    (1, 1),
    (1, 1),
    (0, 2),
    (2, 0),
    (2, 2),
    (1, 1),
    (3, 2),
    (2, 2),
    (1, 0),
    (2, 3),
    (1, 3),
    (2, 1),
    (2, 3),
    (2, 1),
    (1, 1),
    (2, 2),
    (3, 1),
    (1, 1),
    (2, 1),
    (2, 2),
    (1, 1),
    (2, 2),
    (2, 0),
    (1, 1),
    (0, 1),
    (1, 1),
    (1, 1),
    (3, 3),
)

BUILTIN = {"football": FOOTBALL_PAIRS, "nasal": NASAL_PAIRS}


def builtin_dataset(name: str):
    """Bundled dataset by name, as a :class:`~bdw.fit_ml.BivariateDataset`."""
    from .fit_ml import BivariateDataset

    try:
        pairs = BUILTIN[name]
    except KeyError:
        raise ValueError(
            f"unknown dataset {name!r}; available: {', '.join(sorted(BUILTIN))}"
        ) from None
    return BivariateDataset(pairs)
