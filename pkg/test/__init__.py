#!/usr/bin/env python3

# This source code is licensed under the MIT license found in the
# LICENSE file in the root directory of this source tree.

from .asvplan_test_case import AsvPlanTestCase, get_random_test_tensor

# expose classes and functions in package:
__all__ = ["AsvPlanTestCase", "get_random_test_tensor"]
