from dataclasses import dataclass, fields
from typing import Any

import numpy as np

from timeloc.utils import get_serializable_variables


def recursively_convert_to_json(attribute_name: str, attribute_value: Any) -> tuple[str, Any]:
    if isinstance(attribute_value, dict):
        return attribute_name, {str(key): recursively_convert_to_json("", value)[1] for key, value in attribute_value.items()}
    if isinstance(attribute_value, (list, tuple)):
        registered = get_serializable_variables().values()
        if attribute_value and all(type(value) in registered for value in attribute_value):
            class_name = type(attribute_value[0]).__name__
            return f"{attribute_name}::list[{class_name}]", [value.to_json() for value in attribute_value]
        return attribute_name, [recursively_convert_to_json("", value)[1] for value in attribute_value]
    if isinstance(attribute_value, np.ndarray):
        if np.iscomplexobj(attribute_value):
            return f"{attribute_name}::complex_ndarray", [attribute_value.real.tolist(), attribute_value.imag.tolist()]
        return f"{attribute_name}::ndarray", attribute_value.tolist()
    if isinstance(attribute_value, (complex, np.complexfloating)):
        return f"{attribute_name}::complex", [float(attribute_value.real), float(attribute_value.imag)]
    if isinstance(attribute_value, np.generic):
        return attribute_name, attribute_value.item()
    if type(attribute_value) in get_serializable_variables().values():
        return f"{attribute_name}::{type(attribute_value).__name__}", attribute_value.to_json()
    return attribute_name, attribute_value


def recursively_convert_from_json(dictionary: dict[str, Any]) -> dict[str, Any]:
    data_copy = dict(dictionary.items())
    for key, value in dictionary.items():
        if "::" not in key:
            continue
        instance_name, type_tag = key.split("::")
        del data_copy[key]
        if type_tag == "ndarray":
            data_copy[instance_name] = np.array(value)
        elif type_tag == "complex_ndarray":
            data_copy[instance_name] = np.array(value[0], dtype=float) + 1j * np.array(value[1], dtype=float)
        elif type_tag == "complex":
            data_copy[instance_name] = complex(value[0], value[1])
        elif type_tag.startswith("list["):
            class_ = get_serializable_variables()[type_tag.removeprefix("list[").removesuffix("]")]
            data_copy[instance_name] = [class_.from_json(item) for item in value]
        else:
            data_copy[instance_name] = get_serializable_variables()[type_tag].from_json(value)
    return data_copy


# ==========================================================================================


@dataclass(frozen=True, eq=False)
class Serializable:
    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "Serializable":
        return cls(**recursively_convert_from_json(data))

    def to_json(self) -> dict[str, Any]:
        attribute_names = [field_obj.name for field_obj in fields(self)]
        attribute_values = [getattr(self, field_obj.name) for field_obj in fields(self)]
        combined = zip(attribute_names, attribute_values)
        return dict(recursively_convert_to_json(attribute_name, attribute_value) for attribute_name, attribute_value in combined)
