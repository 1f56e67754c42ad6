"""Base helpers for the heomkit record types."""
import dataclasses
from typing import Any, Dict, Type, TypeVar

T = TypeVar("T", bound="ModelMixin")


class ModelMixin:
    """Mixin class providing dictionary conversion for dataclass records."""

    def to_dict(self) -> Dict[str, Any]:
        """Convert the record to a dictionary of its fields.

        Returns:
            Dict[str, Any]: Field name to value mapping.
        """
        return {
            field.name: getattr(self, field.name)
            for field in dataclasses.fields(self)  # type: ignore[arg-type]
        }

    @classmethod
    def from_dict(cls: Type[T], data: Dict[str, Any]) -> T:
        """Create a record from a dictionary, ignoring unknown keys.

        Args:
            data: Dictionary containing record data.

        Returns:
            New instance of the record.
        """
        names = {field.name for field in dataclasses.fields(cls)}  # type: ignore[arg-type]
        return cls(**{k: v for k, v in data.items() if k in names})


def format_float(value: float) -> str:
    """Format a float with 17 significant digits so it round-trips through YAML."""
    text = format(float(value), ".17g")
    special = {"inf": ".inf", "-inf": "-.inf", "nan": ".nan"}
    if text in special:
        return special[text]
    if "." not in text:
        # YAML 1.1 only resolves floats that carry a decimal point
        if "e" in text:
            mantissa, exponent = text.split("e")
            text = f"{mantissa}.0e{exponent}"
        else:
            text += ".0"
    return text
