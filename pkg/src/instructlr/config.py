"""Run configuration from a single TOML file.

Everything a run needs lives in one committed file: paths, gateway
backend, stage parameters, cost presets, service settings.  The only
secret (the LLM API key) stays out of it and is read from the
environment by the gateway.  Relative paths resolve against the config
file's directory so a checked-in config works from any cwd.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib  # Python 3.11+
except ModuleNotFoundError:  # pragma: no cover - 3.10 fallback
    import tomli as tomllib

GATEWAY_BACKENDS = ("replay", "record", "live")


class ConfigError(ValueError):
    """A configuration file problem, reported before any stage runs."""


@dataclass(frozen=True)
class PathsConfig:
    work_dir: Path
    seeds: Path
    drafts: Path
    checked: Path
    final: Path
    review_dir: Path
    annotations: Path
    manifest: Path
    checkpoints_dir: Path
    transcript_dir: Path


@dataclass(frozen=True)
class GatewayConfig:
    backend: str
    requests_per_minute: float = 60.0
    max_attempts: int = 5
    url: str = ""
    model: str = ""

    def __post_init__(self) -> None:
        if self.backend not in GATEWAY_BACKENDS:
            raise ConfigError(
                f"gateway.backend must be one of {GATEWAY_BACKENDS}, "
                f"got {self.backend!r}"
            )
        if self.backend in ("record", "live") and not (self.url and self.model):
            raise ConfigError(
                f"gateway.backend={self.backend!r} requires gateway.url "
                "and gateway.model"
            )
        if self.requests_per_minute <= 0:
            raise ConfigError("gateway.requests_per_minute must be positive")
        if self.max_attempts < 1:
            raise ConfigError("gateway.max_attempts must be at least 1")


@dataclass(frozen=True)
class PipelineConfig:
    lang: str
    seeds_per_topic: int = 2500
    topics: tuple[str, ...] = ()  # empty = every topic in the catalog
    n_shot: int = 3
    max_retries: int = 3
    review_batch_size: int = 200

    def __post_init__(self) -> None:
        if not self.lang:
            raise ConfigError("pipeline.lang is required")
        if self.seeds_per_topic < 1:
            raise ConfigError("pipeline.seeds_per_topic must be positive")
        if self.n_shot < 0:
            raise ConfigError("pipeline.n_shot must be non-negative")
        if self.max_retries < 0:
            raise ConfigError("pipeline.max_retries must be non-negative")
        if self.review_batch_size < 1:
            raise ConfigError("pipeline.review_batch_size must be positive")


@dataclass(frozen=True)
class CostConfig:
    scenarios: Path | None = None  # None = shipped presets


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8321
    token: str = ""
    lease_seconds: float = 900.0

    def __post_init__(self) -> None:
        if not 0 < self.port < 65536:
            raise ConfigError("service.port must be a valid TCP port")
        if self.lease_seconds <= 0:
            raise ConfigError("service.lease_seconds must be positive")


@dataclass(frozen=True)
class Config:
    paths: PathsConfig
    gateway: GatewayConfig
    pipeline: PipelineConfig
    cost: CostConfig = field(default_factory=CostConfig)
    service: ServiceConfig = field(default_factory=ServiceConfig)


_PATH_KEYS = (
    "seeds",
    "drafts",
    "checked",
    "final",
    "review_dir",
    "annotations",
    "manifest",
    "checkpoints_dir",
    "transcript_dir",
)
_PATH_DEFAULTS = {
    "seeds": "seeds.jsonl",
    "drafts": "drafts.jsonl",
    "checked": "checked.jsonl",
    "final": "final.jsonl",
    "review_dir": "review",
    "annotations": "annotations.jsonl",
    "manifest": "manifest.json",
    "checkpoints_dir": "checkpoints",
    "transcript_dir": "transcript",
}


def _reject_unknown(section: str, data: dict, allowed: tuple[str, ...]) -> None:
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key in [{section}]: {unknown[0]!r}")


def _section(raw: dict, name: str) -> dict:
    data = raw.get(name, {})
    if not isinstance(data, dict):
        raise ConfigError(f"[{name}] must be a table")
    return data


def load_config(path: str | Path) -> Config:
    """Parse and validate a TOML config; all errors are ConfigError."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed TOML in {path}: {exc}") from None

    base = path.parent

    def resolve(value: str) -> Path:
        p = Path(value)
        return p if p.is_absolute() else base / p

    paths_raw = _section(raw, "paths")
    _reject_unknown("paths", paths_raw, ("work_dir",) + _PATH_KEYS)
    if "work_dir" not in paths_raw:
        raise ConfigError("paths.work_dir is required")
    work_dir = resolve(str(paths_raw["work_dir"]))
    resolved = {
        key: resolve(str(paths_raw[key]))
        if key in paths_raw
        else work_dir / _PATH_DEFAULTS[key]
        for key in _PATH_KEYS
    }
    paths = PathsConfig(work_dir=work_dir, **resolved)

    gateway_raw = _section(raw, "gateway")
    _reject_unknown(
        "gateway",
        gateway_raw,
        ("backend", "requests_per_minute", "max_attempts", "url", "model"),
    )
    if "backend" not in gateway_raw:
        raise ConfigError("gateway.backend is required")
    gateway = GatewayConfig(
        backend=str(gateway_raw["backend"]),
        requests_per_minute=float(
            gateway_raw.get("requests_per_minute", 60.0)
        ),
        max_attempts=int(gateway_raw.get("max_attempts", 5)),
        url=str(gateway_raw.get("url", "")),
        model=str(gateway_raw.get("model", "")),
    )

    pipeline_raw = _section(raw, "pipeline")
    _reject_unknown(
        "pipeline",
        pipeline_raw,
        (
            "lang",
            "seeds_per_topic",
            "topics",
            "n_shot",
            "max_retries",
            "review_batch_size",
        ),
    )
    if "lang" not in pipeline_raw:
        raise ConfigError("pipeline.lang is required")
    topics = pipeline_raw.get("topics", [])
    if not isinstance(topics, list) or not all(
        isinstance(t, str) for t in topics
    ):
        raise ConfigError("pipeline.topics must be a list of topic names")
    pipeline = PipelineConfig(
        lang=str(pipeline_raw["lang"]),
        seeds_per_topic=int(pipeline_raw.get("seeds_per_topic", 2500)),
        topics=tuple(topics),
        n_shot=int(pipeline_raw.get("n_shot", 3)),
        max_retries=int(pipeline_raw.get("max_retries", 3)),
        review_batch_size=int(pipeline_raw.get("review_batch_size", 200)),
    )

    cost_raw = _section(raw, "cost")
    _reject_unknown("cost", cost_raw, ("scenarios",))
    cost = CostConfig(
        scenarios=resolve(str(cost_raw["scenarios"]))
        if "scenarios" in cost_raw
        else None
    )

    service_raw = _section(raw, "service")
    _reject_unknown(
        "service", service_raw, ("host", "port", "token", "lease_seconds")
    )
    service = ServiceConfig(
        host=str(service_raw.get("host", "127.0.0.1")),
        port=int(service_raw.get("port", 8321)),
        token=str(service_raw.get("token", "")),
        lease_seconds=float(service_raw.get("lease_seconds", 900.0)),
    )

    known_sections = {"paths", "gateway", "pipeline", "cost", "service"}
    for name in raw:
        if name not in known_sections:
            raise ConfigError(f"unknown section [{name}]")

    return Config(
        paths=paths,
        gateway=gateway,
        pipeline=pipeline,
        cost=cost,
        service=service,
    )
