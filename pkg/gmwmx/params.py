"""
Validated parameter descriptors and keyed registries.

Model objects keep their raw parameter values in a ``values`` dictionary.
Descriptor objects declared on the class convert and validate on the way in
and out, so the rest of the package never handles unchecked numbers.
"""

import math


class ParameterDescriptor(object):
    """Generic descriptor class for accessing a named model parameter.

    This relies on the owning instance storing its parameters in a ``values``
    dictionary. Reading returns the converted value, or None when unset.

    :param name: Key of the parameter in the owner's ``values`` dictionary
    :param read_only: If enabled disables the ability to write to this parameter
    :param units: Unit label used in reports"""
    def __init__(self, name, read_only=False, units=''):
        self.name = name
        self.read_only = read_only
        self.units = units

    def __get__(self, instance, owner=None):
        if instance is None:
            return self
        raw = instance.values.get(self.name)
        if raw is not None:
            return self.from_value(raw)
        return None

    def __set__(self, instance, value):
        if self.read_only is True and self.name in instance.values:
            raise AttributeError('Parameter is read-only')
        instance.values[self.name] = self.to_value(value)

    def from_value(self, value):
        """Default converter for reading a stored value.

        Can be overridden in subclasses to provide custom conversion.
        """
        return float(value)

    def to_value(self, value):
        """Default converter for storing a new value.

        Subclasses add range checks by overriding this method.
        """
        if isinstance(value, bool):
            raise TypeError('{0} must be a real number'.format(self.name))
        if not isinstance(value, (int, float)):
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise TypeError('{0} must be a real number'.format(self.name))
        value = float(value)
        if math.isnan(value) or math.isinf(value):
            raise ValueError('{0} must be finite'.format(self.name))
        return value


class Variance(ParameterDescriptor):
    """Descriptor for variance parameters.

    Zero is accepted so that degenerate (noise-free) components can be
    simulated; fitted variances are always strictly positive."""
    def __init__(self, name, read_only=False):
        super(Variance, self).__init__(name, read_only, units='mm^2')

    def to_value(self, value):
        value = super(Variance, self).to_value(value)
        if value < 0.0:
            raise ValueError('{0} must be non-negative'.format(self.name))
        return value


class Bounded(ParameterDescriptor):
    """Descriptor for a parameter confined to an interval.

    :param low: Lower end, None for unbounded
    :param high: Upper end, None for unbounded
    :param closed: Pair of flags telling whether each end is attainable"""
    def __init__(self, name, low=None, high=None, closed=(False, False),
                 read_only=False, units=''):
        super(Bounded, self).__init__(name, read_only, units)
        self.low = low
        self.high = high
        self.closed = closed

    def to_value(self, value):
        value = super(Bounded, self).to_value(value)
        if self.low is not None:
            if value < self.low or (value == self.low and not self.closed[0]):
                raise ValueError('{0}={1} is outside {2}'.format(
                    self.name, value, self.interval()))
        if self.high is not None:
            if value > self.high or (value == self.high and not self.closed[1]):
                raise ValueError('{0}={1} is outside {2}'.format(
                    self.name, value, self.interval()))
        return value

    def interval(self):
        """Human readable form of the admissible interval."""
        left = '[' if self.closed[0] else '('
        right = ']' if self.closed[1] else ')'
        low = '-inf' if self.low is None else repr(self.low)
        high = 'inf' if self.high is None else repr(self.high)
        return '{0}{1}, {2}{3}'.format(left, low, high, right)


class Probability(Bounded):
    """Descriptor for a transition probability."""
    def __init__(self, name, closed=(True, True), read_only=False):
        super(Probability, self).__init__(name, 0.0, 1.0, closed, read_only)


class RegistryNames(object):
    """Descriptor class to get a list of a Registry's keys."""
    def __get__(self, instance, owner=None):
        return list(instance.members.keys())

    def __set__(self, instance, owner=None):
        """Raises an exception upon an attempt to modify; this is read-only."""
        raise AttributeError('Read-only attribute.')


class Registry(object):
    """Container which provides keyed access to a group of definitions.

    Operates similar to a dictionary. Instead of returning the stored value,
    the ``types`` callable is applied to it when given, so each lookup
    yields a fresh object.

    :param members: Mapping of key to stored definition
    :param types: Optional callable building the returned object from the definition
    :param missing: Exception class raised for unknown keys
    :param key_type: Conversion applied to lookup keys"""
    names = RegistryNames()

    def __init__(self, members, types=None, missing=KeyError, key_type=str):
        self.members = dict(members)
        self.types = types
        self.missing = missing
        self.key_type = key_type

    def __getitem__(self, key):
        try:
            value = self.members[self.key_type(key)]
        except (KeyError, ValueError, TypeError):
            raise self.missing("{0} not found".format(key))
        if self.types is None:
            return value
        return self.types(value)

    def __contains__(self, key):
        try:
            return self.key_type(key) in self.members
        except (ValueError, TypeError):
            return False

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def append(self, key, value):
        self.members[self.key_type(key)] = value
