"""AAMI EC57 beat classes and the label conventions used by the beat files."""

from __future__ import annotations

import enum


class ClassLabel(enum.IntEnum):
    """The five AAMI beat classes, ordinal-valued in report (alphabetical) order.

    The integer value of each member is its row index in every confusion
    matrix and metrics report produced by this package.
    """

    F = 0  # fusion
    N = 1  # normal (non-ectopic)
    Q = 2  # unknown etiology
    S = 3  # supraventricular
    V = 4  # ventricular

    @property
    def code(self) -> str:
        return self.name

    @classmethod
    def from_code(cls, code: str) -> "ClassLabel":
        try:
            return cls[code.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown class code {code!r}; expected one of F,N,Q,S,V") from None

    @classmethod
    def from_file_label(cls, value: int) -> "ClassLabel":
        """Map an integer label from the per-beat CSV files to a class.

        The file convention is 0=N, 1=S, 2=V, 3=F, 4=Q.
        """
        try:
            return _FILE_LABEL_TO_CLASS[value]
        except KeyError:
            raise ValueError(f"unknown file label {value!r}; expected 0..4") from None

    @property
    def file_label(self) -> int:
        return _CLASS_TO_FILE_LABEL[self]


# Source-file convention (0=N .. 4=Q); reporting stays alphabetical F,N,Q,S,V.
_FILE_LABEL_TO_CLASS = {
    0: ClassLabel.N,
    1: ClassLabel.S,
    2: ClassLabel.V,
    3: ClassLabel.F,
    4: ClassLabel.Q,
}
_CLASS_TO_FILE_LABEL = {v: k for k, v in _FILE_LABEL_TO_CLASS.items()}

#: All classes in report order.
CLASS_ORDER = tuple(ClassLabel)

#: Class codes in report order.
CLASS_CODES = tuple(c.code for c in CLASS_ORDER)
