"""Scenario configuration: all scalars of one simulated network.

Powers are stored in linear watts; *_db / *_dbm config keys are converted on
ingestion. Defaults reproduce the reference numerical setup (16 APs on a 4x4
grid with 100 m spacing, 4 antennas each, 16+16 four-antenna UEs, 30 dBm
budgets, -95 dBm noise, tau=32, 20 training iterations).
"""

from dataclasses import dataclass, fields, replace

from .numerics import dbm_to_watts

NOISE_DBM_DEFAULT = -95.0
RHO_DBM_DEFAULT = 30.0


class ConfigError(ValueError):
    """Invalid or inconsistent configuration input."""


@dataclass(frozen=True)
class NetworkConfig:
    grid_side: int = 4
    isd: float = 100.0
    m: int = 4
    n: int = 4
    k_dl: int = 16
    k_ul: int = 16
    tau: int = 32
    rho_ap: float = dbm_to_watts(RHO_DBM_DEFAULT)
    rho_ue: float = dbm_to_watts(RHO_DBM_DEFAULT)
    sigma2_ap: float = dbm_to_watts(NOISE_DBM_DEFAULT)
    sigma2_ue: float = dbm_to_watts(NOISE_DBM_DEFAULT)
    ue_isolation_db: float = -20.0
    si_attenuation_db: float = -40.0
    pathloss_const_db: float = -30.5
    pathloss_exp: float = 37.0
    iters: int = 20
    bisect_tol: float = 1e-6
    ridge_scale: float = 1e-12
    damping_mode: str = "adaptive"  # "adaptive" | "fixed"
    alpha_fixed: float = 1.0
    ap_alpha: float = 0.3
    nu_scale: float = 1.0
    nu_gram_scale: float = 0.3  # UL-combiner ridge, relative to trace(Gram)/M
    si_eps: float = None  # statistical residual-SI level; None -> sigma2_ap
    ota_si_proxy: float = None  # epsilon_SI inside nu_bar; None -> m*sigma2_ap/tau
    beta_mode: str = "auto"  # "auto" | "fixed"
    beta1: float = 1.0
    beta2: float = 1.0
    power_clip: bool = True
    seed: int = 1

    def __post_init__(self):
        if self.grid_side < 1:
            raise ConfigError("grid_side must be >= 1")
        for name in ("m", "n"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.k_dl < 0 or self.k_ul < 0 or self.k_dl + self.k_ul == 0:
            raise ConfigError("need at least one UE across k_dl + k_ul")
        if self.tau < self.k_dl + self.k_ul:
            raise ConfigError("tau must be >= K_dl+K_ul")
        if self.rho_ap <= 0 or self.rho_ue <= 0:
            raise ConfigError("transmit powers must be positive")
        if self.sigma2_ap < 0 or self.sigma2_ue < 0:
            raise ConfigError("noise powers must be nonnegative")
        if self.damping_mode not in ("adaptive", "fixed"):
            raise ConfigError(f"unknown damping_mode {self.damping_mode!r}")
        if not 0.0 < self.alpha_fixed <= 1.0:
            raise ConfigError("alpha_fixed must be in (0, 1]")
        if not 0.0 < self.ap_alpha <= 1.0:
            raise ConfigError("ap_alpha must be in (0, 1]")
        if self.nu_gram_scale < 0:
            raise ConfigError("nu_gram_scale must be >= 0")
        if self.beta_mode not in ("auto", "fixed"):
            raise ConfigError(f"unknown beta_mode {self.beta_mode!r}")
        if self.beta1 <= 0 or self.beta2 <= 0:
            raise ConfigError("beta scalings must be positive")

    @property
    def b(self):
        """AP count; always grid_side^2."""
        return self.grid_side * self.grid_side

    @property
    def k(self):
        return self.k_dl + self.k_ul

    @property
    def stat_si_eps(self):
        return self.sigma2_ap if self.si_eps is None else self.si_eps

    @property
    def ota_nu_bar_proxy(self):
        if self.ota_si_proxy is None:
            return self.m * self.sigma2_ap / self.tau
        return self.ota_si_proxy


def desk_config(**overrides):
    """Small preset that exercises every code path in seconds."""
    base = dict(grid_side=2, isd=100.0, m=2, n=2, k_dl=2, k_ul=2, tau=8, iters=20)
    base.update(overrides)
    return NetworkConfig(**base)


def paper_config(**overrides):
    """Full-scale preset matching the reference numerical setup."""
    return NetworkConfig(**overrides)


def noiseless(cfg, **overrides):
    """Copy of cfg with AWGN disabled (used by idealized equivalence checks)."""
    return replace(cfg, sigma2_ap=0.0, sigma2_ue=0.0, **overrides)


_CONFIG_FIELDS = {f.name: f for f in fields(NetworkConfig)}

# keys accepted in config files / CLI overrides beyond the dataclass fields
_DB_KEYS = {
    "rho_ap_dbm": ("rho_ap", dbm_to_watts),
    "rho_ue_dbm": ("rho_ue", dbm_to_watts),
    "sigma2_ap_dbm": ("sigma2_ap", dbm_to_watts),
    "sigma2_ue_dbm": ("sigma2_ue", dbm_to_watts),
}

_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _coerce(name, value, target_type):
    if isinstance(value, str):
        value = value.strip()
        if target_type is bool:
            low = value.lower()
            if low in _BOOL_TRUE:
                return True
            if low in _BOOL_FALSE:
                return False
            raise ConfigError(f"{name}: expected boolean, got {value!r}")
        if target_type is int:
            return int(value)
        if target_type is float:
            return float(value)
        return value
    if target_type is float and isinstance(value, int):
        return float(value)
    return value


def network_config_from_dict(raw):
    """Build a NetworkConfig from a flat key->value mapping.

    Accepts dataclass field names plus *_dbm power keys and `b` (AP count,
    must be a perfect square) and `noise_dbm` (sets both noise powers).
    Unknown keys raise ConfigError naming the key.
    """
    out = {}
    for key, value in raw.items():
        key = key.lower()
        if key in _DB_KEYS:
            field_name, conv = _DB_KEYS[key]
            out[field_name] = conv(_coerce(key, value, float))
        elif key == "noise_dbm":
            watts = dbm_to_watts(_coerce(key, value, float))
            out["sigma2_ap"] = watts
            out["sigma2_ue"] = watts
        elif key == "b":
            b = _coerce(key, value, int)
            side = round(b ** 0.5)
            if side * side != b:
                raise ConfigError(f"b: AP count {b} is not a perfect square")
            out["grid_side"] = side
        elif key in _CONFIG_FIELDS:
            f = _CONFIG_FIELDS[key]
            ftype = f.type if isinstance(f.type, type) else str
            out[key] = _coerce(key, value, ftype)
        else:
            raise ConfigError(f"unknown config key: {key}")
    return NetworkConfig(**out)
