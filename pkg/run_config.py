"""
Per-run configuration: an INI file of `key = value` lines in sections.

    [kernel]
    family = gaussian
    width = 1.0

    [ray]
    velocities = 1.5c, 0.5c

parse_config validates every key and reports all problems at once;
RunConfig.to_text writes the same format back without loss.
"""
import configparser
import logging
import math
import os
from dataclasses import dataclass, field

from errors import ConfigError
from initial_data import GaussianPulse, InitialDataSpec
from micromodulus import KERNEL_FAMILIES, load_tabulated_kernel, make_kernel

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Velocity:
    """A ray speed, absolute or as a multiple of c"""

    value: float
    relative: bool = False

    def resolve(self, c):
        return self.value * c if self.relative else self.value

    def __str__(self):
        number = format(self.value, '.17g')
        return f'{number}c' if self.relative else number


def _float(text):
    value = float(text)
    if not math.isfinite(value):
        raise ValueError('must be finite')
    return value


def _floats(text):
    return tuple(_float(item) for item in text.split(',') if item.strip())


def _velocity(text):
    text = text.strip()
    if text.endswith('c'):
        return Velocity(_float(text[:-1]), relative=True)
    return Velocity(_float(text))


def _velocities(text):
    return tuple(_velocity(item) for item in text.split(',') if item.strip())


def _pulses(text):
    """'amplitude:center:width; ...'"""
    pulses = []
    for item in text.split(';'):
        if not item.strip():
            continue
        parts = [part.strip() for part in item.split(':')]
        if len(parts) != 3:
            raise ValueError(f"pulse '{item.strip()}' must be amplitude:center:width")
        amplitude, center, width = (_float(p) for p in parts)
        if width <= 0:
            raise ValueError(f"pulse width must be positive, got {width}")
        pulses.append((amplitude, center, width))
    return tuple(pulses)


def _int(text):
    return int(text)


def _str(text):
    return text.strip()


def _format(kind, value):
    if kind == 'float':
        return format(value, '.17g')
    if kind == 'floats':
        return ', '.join(format(v, '.17g') for v in value)
    if kind == 'velocities':
        return ', '.join(str(v) for v in value)
    if kind == 'pulses':
        return '; '.join(':'.join(format(x, '.17g') for x in pulse) for pulse in value)
    if kind == 'optional_float':
        return '' if value is None else format(value, '.17g')
    return str(value)


def _optional_float(text):
    return None if not text.strip() else _float(text)


PARSERS = {
    'float': _float,
    'optional_float': _optional_float,
    'floats': _floats,
    'velocities': _velocities,
    'pulses': _pulses,
    'int': _int,
    'str': _str,
}

EXPECTED_FORM = {
    'float': 'a finite number',
    'optional_float': 'a finite number or empty',
    'floats': 'comma-separated numbers',
    'velocities': "comma-separated speeds, e.g. '1.5c, 0.3'",
    'pulses': "'amplitude:center:width' items separated by ';'",
    'int': 'an integer',
    'str': 'text',
}


def _positive(value):
    return None if value > 0 else 'must be positive'


def _power_of_two(value):
    return None if value >= 2 and not value & (value - 1) else 'must be a power of two >= 2'


def _ratio(value):
    return None if value > 1 else 'must exceed 1'


def _family(value):
    return None if value in KERNEL_FAMILIES or value == 'tabulated' else \
        f"must be one of {sorted(KERNEL_FAMILIES) + ['tabulated']}"


def _kernel_index(value):
    return None if value in (-1, 0, 1, 2) else 'must be one of -1, 0, 1, 2'


def _moment_order(value):
    return None if value >= 2 else 'must be at least 2'


def _all_positive(values):
    return None if all(v > 0 for v in values) else 'every entry must be positive'


def _one_or_more(values):
    return None if values else 'needs at least one pulse'


def _non_negative_times(values):
    if any(v < 0 for v in values):
        return 'times must be non-negative'
    return None


# section -> key -> (kind, default, range check)
SCHEMA = {
    'run': {
        'out_dir': ('str', 'out', None),
        'tolerance_scale': ('float', 1.0, _positive),
        'n_jobs': ('int', 1, None),
    },
    'kernel': {
        'family': ('str', 'gaussian', _family),
        'width': ('float', 1.0, _positive),
        'amplitude': ('float', 1.0, _positive),
        'table': ('str', '', None),
        'max_moment_order': ('int', 2, _moment_order),
    },
    'data': {
        'u': ('pulses', ((1.0, 0.0, 1.0),), None),
        'ut': ('pulses', (), None),
        'u_offset': ('float', 0.0, None),
    },
    'grid': {
        'n': ('int', 1024, _power_of_two),
        'dx': ('float', 0.25, _positive),
        'x0': ('optional_float', None, None),
    },
    'dispersion': {
        'xi_min': ('float', -10.0, None),
        'xi_max': ('float', 10.0, None),
        'points': ('int', 201, _positive),
    },
    'evolve': {
        'times': ('floats', (0.0, 1.0, 5.0), _non_negative_times),
    },
    'ray': {
        'velocities': ('velocities', (Velocity(1.5, True), Velocity(0.5, True)), None),
        'x0': ('float', 0.0, None),
        't_min': ('float', 10.0, _positive),
        't_max': ('float', 100.0, _positive),
        'ratio': ('float', 1.02, _ratio),
        'decay_order': ('int', 3, _positive),
    },
    'kernels': {
        'j': ('int', 0, _kernel_index),
        'A': ('float', 1.0, _positive),
        't': ('float', 5.0, None),
        'distance_min': ('float', 2.0, None),
        'distance_max': ('float', 20.0, None),
        'points': ('int', 16, _positive),
        'tail_order': ('float', 4.0, _positive),
    },
    'compare': {
        'times': ('floats', (1.0, 2.0, 5.0, 10.0, 20.0), _all_positive),
        'velocities': ('velocities', (Velocity(1.5, True), Velocity(0.5, True)), None),
        'x0': ('float', 0.0, None),
        'cone_time': ('float', 2.0, _positive),
        'probe_offset': ('float', 3.0, _positive),
        'cone_pulse': ('pulses', ((1.0, 0.0, 0.1),), _one_or_more),
    },
}


@dataclass
class RunConfig:
    """Validated values for every section, defaults filled in"""

    values: dict = field(default_factory=dict)

    def get(self, section, key):
        return self.values[section][key]

    def section(self, name):
        return dict(self.values[name])

    def to_text(self):
        lines = []
        for section, keys in SCHEMA.items():
            lines.append(f'[{section}]')
            for key, (kind, _, _) in keys.items():
                lines.append(f'{key} = {_format(kind, self.values[section][key])}')
            lines.append('')
        return '\n'.join(lines)

    def build_kernel(self):
        kernel = self.section('kernel')
        if kernel['family'] == 'tabulated':
            return load_tabulated_kernel(kernel['table'], max_moment_order=kernel['max_moment_order'])
        return make_kernel(kernel['family'], width=kernel['width'], amplitude=kernel['amplitude'])

    def build_data(self):
        data = self.section('data')
        return InitialDataSpec(
            u_terms=tuple(GaussianPulse(*pulse) for pulse in data['u']),
            ut_terms=tuple(GaussianPulse(*pulse) for pulse in data['ut']),
            u_offset=data['u_offset'],
        )

    def grid_origin(self):
        x0 = self.get('grid', 'x0')
        if x0 is None:
            return -0.5 * self.get('grid', 'n') * self.get('grid', 'dx')
        return x0


def default_config():
    return RunConfig({section: {key: spec[1] for key, spec in keys.items()} for section, keys in SCHEMA.items()})


def _cross_checks(values, problems):
    if values['kernel']['family'] == 'tabulated':
        table = values['kernel']['table']
        if not table:
            problems.append(('kernel.table', 'required when family = tabulated'))
        elif not os.path.exists(table):
            problems.append(('kernel.table', f"file '{table}' does not exist"))
    if values['ray']['t_max'] < values['ray']['t_min']:
        problems.append(('ray.t_max', 'must not be below ray.t_min'))
    if values['dispersion']['xi_max'] <= values['dispersion']['xi_min']:
        problems.append(('dispersion.xi_max', 'must exceed dispersion.xi_min'))
    if values['kernels']['distance_min'] < 1.0:
        problems.append(('kernels.distance_min', 'must be at least 1 (outside the cone)'))
    if values['kernels']['distance_max'] <= values['kernels']['distance_min']:
        problems.append(('kernels.distance_max', 'must exceed kernels.distance_min'))


def parse_config(text):
    """Parse and validate; raises ConfigError listing every problem found"""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigError([('<file>', str(e).splitlines()[0])])

    values = default_config().values
    problems = []
    for section in parser.sections():
        if section not in SCHEMA:
            problems.append((section, f"unknown section; expected one of {sorted(SCHEMA)}"))
            continue
        for key, raw in parser.items(section):
            path = f'{section}.{key}'
            if key not in SCHEMA[section]:
                problems.append((path, f"unknown key; expected one of {sorted(SCHEMA[section])}"))
                continue
            kind, _, check = SCHEMA[section][key]
            try:
                value = PARSERS[kind](raw)
            except ValueError as e:
                problems.append((path, f"expected {EXPECTED_FORM[kind]}, got '{raw}' ({str(e)})"))
                continue
            message = check(value) if check else None
            if message:
                problems.append((path, f"{message}, got {raw.strip()}"))
                continue
            values[section][key] = value

    if not problems:
        _cross_checks(values, problems)
    if problems:
        logger.error(f"Configuration has {len(problems)} problem(s)")
        raise ConfigError(problems)
    return RunConfig(values)


def load_config(path):
    with open(path, encoding='utf-8') as handle:
        return parse_config(handle.read())
