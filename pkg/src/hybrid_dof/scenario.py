"""Scenario files: strict JSON in, strict JSON out."""

import json
from dataclasses import dataclass, field

from .errors import InvalidArgumentError
from .model import NetworkConfig, UserProfile
from .rate import SCHEME_KINDS, DiaOptions, Scheme

__all__ = ['Scenario', 'parse_scenario', 'load_scenario', 'dump_scenario']

_FIELDS = ('config', 'scheme', 'streams', 'extension_t', 'snr_db', 'trials',
           'seed', 'dia')
_REQUIRED = ('config', 'snr_db', 'trials', 'seed')
_USER_FIELDS = ('m_rf', 'm_ant', 'n_rf', 'n_ant')
_DIA_FIELDS = ('max_iter', 'leak_tol')

# Sweeps read slopes at 40-60 dB, where a 1e-6 leakage floor is visible.
SWEEP_DIA = DiaOptions(max_iter=20000, leak_tol=1e-10)


@dataclass
class Scenario:
    config: NetworkConfig
    snr_db: list
    trials: int
    seed: int
    scheme: str = 'auto'
    streams: list = None
    extension_t: int = None
    dia: DiaOptions = field(default_factory=lambda: SWEEP_DIA)

    def to_scheme(self):
        return Scheme(self.scheme,
                      None if self.streams is None else tuple(self.streams),
                      self.extension_t, self.dia)

    def to_dict(self):
        return {
            'config': {'users': [{f: getattr(u, f) for f in _USER_FIELDS}
                                 for u in self.config.users]},
            'scheme': self.scheme,
            'streams': self.streams,
            'extension_t': self.extension_t,
            'snr_db': list(self.snr_db),
            'trials': self.trials,
            'seed': self.seed,
            'dia': {'max_iter': self.dia.max_iter,
                    'leak_tol': self.dia.leak_tol},
        }


def _reject_unknown(obj, allowed, where):
    if not isinstance(obj, dict):
        raise InvalidArgumentError(f"{where} must be a JSON object")
    extra = sorted(set(obj) - set(allowed))
    if extra:
        raise InvalidArgumentError(f"unknown keys in {where}: {extra}")


def _int(value, name, minimum):
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidArgumentError(f"{name} must be an integer")
    if value < minimum:
        raise InvalidArgumentError(f"{name} must be >= {minimum}")
    return value


def parse_scenario(obj):
    """Validate a decoded JSON object and build a :class:`Scenario`."""
    _reject_unknown(obj, _FIELDS, 'scenario')
    missing = [f for f in _REQUIRED if f not in obj]
    if missing:
        raise InvalidArgumentError(f"missing scenario keys: {missing}")

    cfg = obj['config']
    _reject_unknown(cfg, ('users',), 'config')
    users = cfg.get('users')
    if not isinstance(users, list) or not users:
        raise InvalidArgumentError("config.users must be a non-empty list")
    profiles = []
    for n, u in enumerate(users):
        where = f'config.users[{n}]'
        _reject_unknown(u, _USER_FIELDS, where)
        if set(u) != set(_USER_FIELDS):
            raise InvalidArgumentError(f"{where} needs {list(_USER_FIELDS)}")
        profiles.append(UserProfile(*(_int(u[f], f'{where}.{f}', 1)
                                      for f in _USER_FIELDS)))

    scheme = obj.get('scheme', 'auto')
    if scheme not in SCHEME_KINDS:
        raise InvalidArgumentError(
            f"scheme must be one of {list(SCHEME_KINDS)}, got {scheme!r}")
    streams = obj.get('streams')
    if streams is not None:
        if not isinstance(streams, list) or not streams:
            raise InvalidArgumentError("streams must be a non-empty list")
        streams = [_int(s, 'streams', 0) for s in streams]
    ext = obj.get('extension_t')
    if ext is not None:
        ext = _int(ext, 'extension_t', 1)

    snr = obj['snr_db']
    if (not isinstance(snr, list) or not snr or
            not all(isinstance(s, (int, float)) and not isinstance(s, bool)
                    for s in snr)):
        raise InvalidArgumentError("snr_db must be a non-empty list of "
                                   "numbers")
    if any(b <= a for a, b in zip(snr, snr[1:])):
        raise InvalidArgumentError("snr_db must be strictly increasing")

    dia = SWEEP_DIA
    if obj.get('dia') is not None:
        _reject_unknown(obj['dia'], _DIA_FIELDS, 'dia')
        max_iter = _int(obj['dia'].get('max_iter', dia.max_iter),
                        'dia.max_iter', 1)
        leak_tol = obj['dia'].get('leak_tol', dia.leak_tol)
        if not isinstance(leak_tol, (int, float)) or leak_tol <= 0:
            raise InvalidArgumentError("dia.leak_tol must be positive")
        dia = DiaOptions(max_iter, float(leak_tol))

    return Scenario(NetworkConfig(tuple(profiles)), list(snr),
                    _int(obj['trials'], 'trials', 1),
                    _int(obj['seed'], 'seed', 0), scheme, streams, ext, dia)


def load_scenario(path):
    with open(path, encoding='utf-8') as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidArgumentError(f"{path}: invalid JSON: {exc}") from exc
    return parse_scenario(obj)


def dump_scenario(scenario):
    return json.dumps(scenario.to_dict(), sort_keys=True)
