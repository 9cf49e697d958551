"""
Tests to confirm parameter descriptors validate values and registries
resolve keys.

When naming test cases the following format should be used.
test_<Class>_<Description>
"""

import unittest

from gmwmx import params
from gmwmx.tests import common_testing


class Holder(object):
    plain = params.ParameterDescriptor('plain')
    fixed = params.ParameterDescriptor('fixed', read_only=True)
    var = params.Variance('var')
    ratio = params.Bounded('ratio', 0.0, 2.0, closed=(True, False))
    prob = params.Probability('prob')

    def __init__(self):
        self.values = {}


class DescriptorCase(common_testing.DefaultCase):

    def setUp(self):
        self.holder = Holder()

    def tearDown(self):
        pass

    def test_ParameterDescriptor_Unset(self):
        """Reading an unset parameter gives None"""
        self.assertIsNone(self.holder.plain)

    def test_ParameterDescriptor_Converts(self):
        """Values are stored as floats"""
        self.holder.plain = 3
        self.assertIsInstance(self.holder.plain, float)
        self.assertEqual(self.holder.values['plain'], 3.0)

    def test_ParameterDescriptor_RejectsNonNumbers(self):
        """Non-numeric and non-finite values are refused"""
        with self.assertRaises(TypeError):
            self.holder.plain = 'abc'
        with self.assertRaises(TypeError):
            self.holder.plain = True
        with self.assertRaises(ValueError):
            self.holder.plain = float('nan')

    def test_ParameterDescriptor_ReadOnly(self):
        """A read-only parameter can be set once"""
        self.holder.fixed = 1.0
        with self.assertRaises(AttributeError):
            self.holder.fixed = 2.0

    def test_Variance_Range(self):
        """Zero is accepted, negative values are not"""
        self.holder.var = 0.0
        self.assertEqual(self.holder.var, 0.0)
        with self.assertRaises(ValueError):
            self.holder.var = -1e-9
        self.assertEqual(Holder.var.units, 'mm^2')

    def test_Bounded_Ends(self):
        """Closed ends are attainable, open ends are not"""
        self.holder.ratio = 0.0
        with self.assertRaises(ValueError):
            self.holder.ratio = 2.0
        with self.assertRaises(ValueError):
            self.holder.ratio = -0.5
        self.assertEqual(Holder.ratio.interval(), '[0.0, 2.0)')

    def test_Probability_Range(self):
        """Probabilities live in [0, 1]"""
        self.holder.prob = 1.0
        with self.assertRaises(ValueError):
            self.holder.prob = 1.5


class RegistryCase(common_testing.DefaultCase):

    def setUp(self):
        self.registry = params.Registry({'A': 1, 'B': 2}, types=lambda v: v * 10,
                                        missing=LookupError, key_type=lambda k: str(k).upper())

    def test_Registry_Lookup(self):
        """Lookups convert the key and apply the type"""
        self.assertEqual(self.registry['a'], 10)
        self.assertIn('b', self.registry)
        self.assertEqual(len(self.registry), 2)
        self.assertEqual(self.registry.names, ['A', 'B'])

    def test_Registry_Missing(self):
        """Unknown keys raise the configured exception"""
        with self.assertRaises(LookupError):
            self.registry['c']

    def test_Registry_Append(self):
        """Appended members become reachable"""
        self.registry.append('c', 3)
        self.assertEqual(self.registry['C'], 30)
        self.assertEqual(sorted(self.registry), ['A', 'B', 'C'])

    def test_Registry_NamesReadOnly(self):
        """The names list cannot be assigned"""
        with self.assertRaises(AttributeError):
            self.registry.names = []


if __name__ == '__main__':
    unittest.main()
