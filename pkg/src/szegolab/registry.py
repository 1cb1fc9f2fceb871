"""
Label registries binding CLI/config strings such as "eta:1", "abs_pow:0.5"
or "const:0.5" to functions and symbols.
"""

from typing import Callable, Dict, List, Optional

from .exceptions import InvalidParameterError
from .func_classes import (
    SingularFunction,
    abs_pow,
    bump,
    cos_bump,
    eta_function,
    gauss_bump,
    lorentz,
    poly_bump,
    power,
    smooth_gamma2,
    zero_function,
)
from .wiener_hopf import Symbol2, bump_symbol, bump_x_symbol, const_symbol, gauss_xi_symbol


def _split(label: str):
    name, _, arg = label.strip().partition(":")
    return name, [a for a in arg.split(",") if a] if arg else []


def _number(value: str, label: str) -> float:
    try:
        return float(value)
    except ValueError as e:
        raise InvalidParameterError(f"bad numeric argument '{value}' in '{label}'") from e


def _integer(value: str, label: str) -> int:
    number = _number(value, label)
    if number != int(number):
        raise InvalidParameterError(f"'{label}' needs an integer argument")
    return int(number)


FUNCTIONS: Dict[str, Callable[[List[str], str], SingularFunction]] = {
    "zero": lambda args, label: zero_function(),
    "eta": lambda args, label: eta_function(_number(args[0], label) if args else 1.0),
    "abs_pow": lambda args, label: abs_pow(_number(args[0], label) if args else 0.5),
    "poly": lambda args, label: power(_integer(args[0], label)),
    "bump": lambda args, label: bump(_number(args[0], label) if args else 1.0),
    "gauss_bump": lambda args, label: gauss_bump(),
    "cos_bump": lambda args, label: cos_bump(),
    "poly_bump": lambda args, label: poly_bump(_integer(args[0], label) if args else 2),
    "smooth_gamma2": lambda args, label: smooth_gamma2(),
    "lorentz": lambda args, label: lorentz(),
}

SYMBOLS: Dict[str, Callable[[List[str], str], Symbol2]] = {
    "const": lambda args, label: const_symbol(complex(args[0].replace(" ", "")) if args else 1.0),
    "bump": lambda args, label: bump_symbol(_number(args[0], label) if args else 1.0),
    "bump_x": lambda args, label: bump_x_symbol(*[_number(a, label) for a in args[:2]]),
    "gauss_xi": lambda args, label: gauss_xi_symbol(_number(args[0], label) if args else 1.0),
}


def function_from_label(label: str, n: Optional[int] = None) -> SingularFunction:
    """Registry function; n overrides the declared smoothness order"""
    name, args = _split(label)
    if name not in FUNCTIONS:
        raise InvalidParameterError(f"unknown function '{label}'; known: {sorted(FUNCTIONS)}")
    try:
        f = FUNCTIONS[name](args, label)
    except ValueError as e:
        raise InvalidParameterError(f"invalid function label '{label}': {e}") from e
    return f if n is None else f.model_copy(update={"n": n})


def symbol_from_label(label: str) -> Symbol2:
    name, args = _split(label)
    if name not in SYMBOLS:
        raise InvalidParameterError(f"unknown symbol '{label}'; known: {sorted(SYMBOLS)}")
    try:
        return SYMBOLS[name](args, label)
    except ValueError as e:
        raise InvalidParameterError(f"invalid symbol label '{label}': {e}") from e
