"""JSON schemas for every file the toolkit reads or writes."""

from __future__ import annotations

import functools

import jsonschema

PAULI_LABEL = {"type": "string", "pattern": "^[+-]?[IXYZ]+$"}
UNSIGNED_LABEL = {"type": "string", "pattern": "^[IXYZ]+$"}
QUBITS = {"type": "array", "items": {"type": "integer", "minimum": 0}}

OPERATION = {
    "type": "object",
    "required": ["gate", "qubits"],
    "properties": {
        "gate": {"type": "string"},
        "qubits": QUBITS,
        "power": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}

CIRCUIT = {
    "type": "object",
    "required": ["n_qubits", "moments"],
    "properties": {
        "n_qubits": {"type": "integer", "minimum": 1},
        "moments": {"type": "array", "items": {"type": "array", "items": OPERATION}},
        "metadata": {"type": "object"},
    },
}

GATE = {
    "type": "object",
    "required": ["name", "arity", "table"],
    "properties": {
        "name": {"type": "string"},
        "arity": {"enum": [1, 2]},
        "table": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["sign", "label"],
                "properties": {"sign": {"enum": [1, -1]}, "label": UNSIGNED_LABEL},
            },
        },
    },
}

GATESET = {"type": "array", "items": GATE}

CHANNEL = {
    "type": "object",
    "required": ["k", "probs"],
    "properties": {
        "k": {"enum": [1, 2]},
        "probs": {"type": "object", "additionalProperties": {"type": "number"}},
    },
}

NOISE_MODEL = {
    "type": "array",
    "items": {
        "type": "object",
        "required": ["gate", "qubits", "channel"],
        "properties": {"gate": {"type": "string"}, "qubits": QUBITS, "channel": CHANNEL},
    },
}

COUNTS = {
    "type": "object",
    "required": ["job_id", "circuit_id", "twirl_id", "prep_id", "measured_qubits", "counts"],
    "properties": {
        "job_id": {"type": "string"},
        "circuit_id": {"type": "integer", "minimum": 0},
        "twirl_id": {"type": "integer", "minimum": 0},
        "probe_id": {"type": "integer", "minimum": 0},
        "prep_id": {"type": "integer", "minimum": 0},
        "measured_qubits": QUBITS,
        "counts": {
            "type": "object",
            "propertyNames": {"pattern": "^[01]*$"},
            "additionalProperties": {"type": "integer", "minimum": 0},
        },
    },
}

JOB = {
    "type": "object",
    "required": [
        "job_id", "circuit_id", "twirl_id", "probe_id", "prep_id", "prep",
        "measured_pauli", "measured_qubits", "shots", "rng_key",
    ],
    "properties": {
        "job_id": {"type": "string"},
        "circuit_id": {"type": "integer"},
        "twirl_id": {"type": "integer"},
        "probe_id": {"type": "integer"},
        "prep_id": {"type": "integer"},
        "prep": {
            "type": "object",
            "required": ["states", "sign"],
            "properties": {
                "states": {"type": "array", "items": {"enum": ["0", "1", "+", "-", "+i", "-i"]}},
                "sign": {"enum": [1, -1]},
            },
        },
        "prep_gates": {"type": "array", "items": {"type": "array", "items": {"type": "string"}}},
        "measured_pauli": UNSIGNED_LABEL,
        "measured_qubits": QUBITS,
        "measure_gates": {"type": "object"},
        "shots": {"type": "integer", "minimum": 1},
        "rng_key": {"type": "array", "items": {"type": "integer"}},
    },
}

PARAMETER = {
    "type": "object",
    "required": ["gate", "qubits", "pauli"],
    "properties": {"gate": {"type": "string"}, "qubits": QUBITS, "pauli": UNSIGNED_LABEL},
}

PLAN = {
    "type": "object",
    "required": ["version", "config", "gateset", "index", "design", "circuits", "jobs"],
    "properties": {
        "version": {"type": "string"},
        "config": {"type": "object"},
        "gateset": GATESET,
        "index": {"type": "array", "items": PARAMETER},
        "design": {
            "type": "object",
            "required": ["attempts", "rank", "n_rows", "n_columns"],
        },
        "circuits": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["circuit_id", "circuit", "probes", "twirls"],
                "properties": {
                    "circuit_id": {"type": "integer"},
                    "circuit": CIRCUIT,
                    "probes": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["pauli", "output", "sign"],
                            "properties": {
                                "pauli": UNSIGNED_LABEL,
                                "output": UNSIGNED_LABEL,
                                "sign": {"enum": [1, -1]},
                            },
                        },
                    },
                    "twirls": {"type": "array", "items": {"type": "object"}},
                },
            },
        },
        "jobs": {"type": "array", "items": JOB},
    },
}

ESTIMATES = {
    "type": "object",
    "required": ["rows"],
    "properties": {
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["row", "circuit_id", "probe", "value", "shots", "stderr", "valid"],
                "properties": {
                    "row": {"type": "integer"},
                    "circuit_id": {"type": "integer"},
                    "probe": UNSIGNED_LABEL,
                    "value": {"type": "number"},
                    "shots": {"type": "integer"},
                    "stderr": {"type": "number", "minimum": 0},
                    "valid": {"type": "boolean"},
                },
            },
        }
    },
}

REPORT = {
    "type": "object",
    "required": ["parameters", "channels", "residual_norm", "rank", "clamp_floor", "clamped_rows"],
    "properties": {
        "parameters": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["index", "gate", "qubits", "pauli", "lambda"],
                "properties": {
                    "index": {"type": "integer"},
                    "lambda": {"type": "number"},
                    "stderr": {"type": "number"},
                    "true_lambda": {"type": "number"},
                    "abs_error": {"type": "number"},
                },
            },
        },
        "channels": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["gate", "qubits", "channel"],
                "properties": {"channel": CHANNEL, "tvd": {"type": "number"}},
            },
        },
        "residual_norm": {"type": "number"},
        "rank": {"type": "object", "required": ["rank", "n_columns", "full_rank"]},
        "summary": {
            "type": "object",
            "required": ["mean_abs_error", "mean_tvd"],
        },
    },
}

CONFIG = {
    "type": "object",
    "properties": {
        "n_qubits": {"type": "integer", "minimum": 1},
        "gateset": {"type": "string"},
        "m_half": {"type": "integer", "minimum": 0},
        "m_prime": {"type": "integer", "minimum": 0},
        "n_circuits": {"type": "integer", "minimum": 1},
        "n_twirls": {"type": "integer", "minimum": 0},
        "shots_per_circuit": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "backend": {"enum": ["simulator", "ingest"]},
        "noise_model": {"type": ["string", "null"]},
        "noise_strength": {"type": "number", "minimum": 0, "exclusiveMaximum": 0.5},
        "ingest_dir": {"type": ["string", "null"]},
        "out_dir": {"type": "string"},
        "max_weight": {"enum": [1, 2]},
        "max_attempts": {"type": "integer", "minimum": 1},
        "max_condition": {"type": ["number", "null"]},
    },
    "additionalProperties": False,
}

SCHEMAS = {
    "circuit": CIRCUIT,
    "gateset": GATESET,
    "channel": CHANNEL,
    "noise_model": NOISE_MODEL,
    "counts": COUNTS,
    "plan": PLAN,
    "estimates": ESTIMATES,
    "report": REPORT,
    "config": CONFIG,
}


class SchemaError(ValueError):
    pass


@functools.lru_cache(maxsize=None)
def _validator(kind: str):
    schema = SCHEMAS[kind]
    cls = jsonschema.validators.validator_for(schema)
    cls.check_schema(schema)
    return cls(schema)


def validate(kind: str, data) -> None:
    try:
        _validator(kind).validate(data)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise SchemaError(f"{kind} file invalid at '{path}': {exc.message}") from None
