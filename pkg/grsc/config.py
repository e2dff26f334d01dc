#  Copyright (c) 2024 Thomas Holland
#
#  This work is licensed under the terms of the MIT license.
#  For a copy, see the accompanying LICENSE.txt file or
#  go to <https://opensource.org/licenses/MIT>.
#
from fractions import Fraction
from typing import Union, Any, Callable, NamedTuple, Dict

from grsc.core import WORD_LENGTH, FREE_PRODUCT_LENGTH
from grsc.exceptions import ConfigError


class OptInfo(NamedTuple):
    """
    Named tuple holding information about an option.
    """
    default: Any = None
    converter: Callable[[Any], Any] = lambda x: x  # default: do not convert
    validator: Callable[[Any], bool] = lambda x: True  # default: accept all values


class Options:

    @staticmethod
    def _to_bool(value: Union[str, bool]) -> bool:
        if isinstance(value, bool):
            return value
        if value in ('yes', 'true', '1'):
            return True
        elif value in ('no', 'false', '0'):
            return False
        else:
            raise ValueError(f"{value} is not a True/False value.")

    @staticmethod
    def _to_fraction(value: Union[str, int, Fraction]) -> Fraction:
        # Fraction("1/6") and Fraction(1, 6) both work, floats are refused to keep comparisons exact
        if isinstance(value, float):
            raise ValueError(f"{value} is a float, give ratios as exact fractions like '1/6'")
        return Fraction(value)


class GrscConfig(Options):
    """
    All tunable values of the verifiers, the coefficient search and the pipeline.

    Options can be given as keyword arguments, either already typed or as strings from the
    command line. Unknown keywords raise :class:`~grsc.exceptions.ConfigError`.

    :param ratio: The λ of the metric small cancellation condition, an exact fraction. Default 1/6.
    :param length: ``"free_product"`` (syllable length) or ``"word"``. Default ``"free_product"``.
    :param pieces_p: The p of the Gr(p) condition. Default 7.
    :param cycle_cap: Maximum number of simple cycles enumerated before giving up. Default 20000.
    :param workers: Number of worker threads. Default 1.
    :param max_k: Largest k accepted by the pipeline unless :code:`allow_large_k` is set. Default 3.
    :param seed: Seed of the coefficient search. Default 7.
    :param budget: Number of candidate coefficient systems the search may evaluate. Default 2000.
    :param search_strategy: ``"skeleton"`` draws incidence structures of large girth and lays the lines
        out with Golomb rulers, ``"random"`` samples the identifications directly. Default ``"skeleton"``.
    :param search_skeleton: ``"regular"`` (random 4-regular graphs, any girth) or ``"circulant"``
        (cyclic structures, girth at most 6 but with a rotation symmetry). Default ``"regular"``.
    :param search_girth: smallest girth of the line/chain incidence graph accepted by the skeleton
        search. A cycle of the Rips-Segev graph has at least this many syllables. Default 6.
    :param search_n_min: smallest number N of lines tried by the search.
    :param search_n_max: largest N. Default 40.
    :param search_c_min: smallest line length C_i; at least 2.
    :param search_c_max: largest C_i. Default 12.
    :param restart_base: Candidates in the first restart; every restart doubles this.
    :param backtrack_limit: Assignment attempts (or skeleton draws) per candidate before it is abandoned.
    :param require_certificate: Reject candidates whose product certificate has singleton buckets.
    """

    ratio: Fraction
    length: str
    pieces_p: int
    cycle_cap: int
    workers: int
    max_k: int
    allow_large_k: bool
    seed: int
    budget: int
    search_strategy: str
    search_skeleton: str
    search_girth: int
    search_n_min: int
    search_n_max: int
    search_c_min: int
    search_c_max: int
    restart_base: int
    backtrack_limit: int
    require_certificate: bool

    def __init__(self, **kwargs):
        self.options: Dict[str, OptInfo] = {
            # name of the config: OptInfo( default value, converter from string, value validator )
            "ratio":
                OptInfo(Fraction(1, 6), Options._to_fraction, lambda x: x > 0),
            "length":
                OptInfo(FREE_PRODUCT_LENGTH, str, lambda x: x in (FREE_PRODUCT_LENGTH, WORD_LENGTH)),
            "pieces_p":
                OptInfo(7, int, lambda x: x >= 2),
            "cycle_cap":
                OptInfo(20000, int, lambda x: x >= 1),
            "workers":
                OptInfo(1, int, lambda x: 1 <= x <= 256),
            "max_k":
                OptInfo(3, int, lambda x: x >= 1),
            "allow_large_k":
                OptInfo(False, Options._to_bool),
            "seed":
                OptInfo(7, int),
            "budget":
                OptInfo(2000, int, lambda x: x >= 0),
            "search_strategy":
                OptInfo("skeleton", str, lambda x: x in ("skeleton", "random")),
            "search_skeleton":
                OptInfo("regular", str, lambda x: x in ("regular", "circulant")),
            "search_girth":
                OptInfo(6, int, lambda x: x >= 4),
            "search_n_min":
                OptInfo(1, int, lambda x: x >= 1),
            "search_n_max":
                OptInfo(40, int, lambda x: x >= 1),
            "search_c_min":
                OptInfo(3, int, lambda x: x >= 2),
            "search_c_max":
                OptInfo(12, int, lambda x: x >= 2),
            "restart_base":
                OptInfo(16, int, lambda x: x >= 1),
            "backtrack_limit":
                OptInfo(2000, int, lambda x: x >= 1),
            "require_certificate":
                OptInfo(True, Options._to_bool),
        }

        # load all defaults
        for option, info in self.options.items():
            setattr(self, option, info.default)

        for key, value in kwargs.items():
            if key not in self.options:
                raise ConfigError(f"unknown option '{key}'")
            self.set_option(key, value)

        if self.search_n_min > self.search_n_max:
            raise ConfigError(f"search_n_min {self.search_n_min} is larger than search_n_max {self.search_n_max}")
        if self.search_c_min > self.search_c_max:
            raise ConfigError(f"search_c_min {self.search_c_min} is larger than search_c_max {self.search_c_max}")

    def set_option(self, name: str, value: Any):
        try:
            info: OptInfo = self.options[name]
        except KeyError:
            raise ConfigError(f"unknown option '{name}'") from None
        # convert to required type and validate
        try:
            # noinspection PyArgumentList
            real_value = info.converter(value)
        except (ValueError, TypeError, ZeroDivisionError) as exc:
            raise ConfigError(f"{value} is not a valid value for option '{name}': {exc}") from exc
        # noinspection PyArgumentList
        if not info.validator(real_value):
            raise ConfigError(f"{value} is not a valid value for option '{name}'")

        setattr(self, name, real_value)

    def as_dict(self) -> Dict[str, Any]:
        """All options with JSON-friendly values (fractions as strings)."""
        result = {}
        for name in self.options:
            value = getattr(self, name)
            result[name] = str(value) if isinstance(value, Fraction) else value
        return result
