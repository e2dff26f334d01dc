#  Copyright (c) 2024 Thomas Holland
#
#  This work is licensed under the terms of the MIT license.
#  For a copy, see the accompanying LICENSE.txt file or
#  go to <https://opensource.org/licenses/MIT>.
#
import json
import unittest
from fractions import Fraction

from grsc.config import GrscConfig
from grsc.exceptions import ConfigError


class MyTestCase(unittest.TestCase):

    def test_defaults(self):
        config = GrscConfig()
        self.assertEqual(Fraction(1, 6), config.ratio)
        self.assertEqual("free_product", config.length)
        self.assertEqual(7, config.pieces_p)
        self.assertEqual(20000, config.cycle_cap)
        self.assertEqual(3, config.max_k)
        self.assertFalse(config.allow_large_k)
        self.assertTrue(config.require_certificate)
        self.assertEqual("skeleton", config.search_strategy)
        self.assertEqual("regular", config.search_skeleton)
        self.assertEqual(6, config.search_girth)
        self.assertEqual(40, config.search_n_max)

    def test_strings(self):
        # values as they come from the command line
        config = GrscConfig(ratio="1/4", workers="3", allow_large_k="yes", length="word")
        self.assertEqual(Fraction(1, 4), config.ratio)
        self.assertEqual(3, config.workers)
        self.assertTrue(config.allow_large_k)
        self.assertEqual("word", config.length)

        config.set_option("require_certificate", "no")
        self.assertFalse(config.require_certificate)
        config.set_option("ratio", 2)
        self.assertEqual(Fraction(2), config.ratio)

    def test_invalid(self):
        with self.assertRaises(ConfigError):
            GrscConfig(ratio=0.25)
        with self.assertRaises(ConfigError):
            GrscConfig(ratio="0")
        with self.assertRaises(ConfigError):
            GrscConfig(ratio="1/0")
        with self.assertRaises(ConfigError):
            GrscConfig(length="syllables")
        with self.assertRaises(ConfigError):
            GrscConfig(workers=0)
        with self.assertRaises(ConfigError):
            GrscConfig(pieces_p=1)
        with self.assertRaises(ConfigError):
            GrscConfig(search_strategy="exhaustive")
        with self.assertRaises(ConfigError):
            GrscConfig(search_skeleton="cubic")
        with self.assertRaises(ConfigError):
            GrscConfig(search_girth=3)
        with self.assertRaises(ConfigError):
            GrscConfig(allow_large_k="maybe")
        with self.assertRaises(ConfigError):
            GrscConfig(colour="blue")
        with self.assertRaises(ConfigError):
            GrscConfig().set_option("colour", "blue")
        with self.assertRaises(ConfigError):
            GrscConfig(search_n_min=4, search_n_max=2)
        with self.assertRaises(ConfigError):
            GrscConfig(search_c_min=9)

        # ConfigError is a ValueError too
        with self.assertRaises(ValueError):
            GrscConfig(budget=-1)

    def test_as_dict(self):
        values = GrscConfig(ratio="2/3").as_dict()
        self.assertEqual("2/3", values["ratio"])
        self.assertEqual(7, values["seed"])
        # everything is serializable
        json.dumps(values)


if __name__ == '__main__':
    unittest.main()
