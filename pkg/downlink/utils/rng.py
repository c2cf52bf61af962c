# Copyright 2022 InstaDeep Ltd. All rights reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import numpy as np


def substream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for `(seed, *keys)`, e.g. `substream(seed, generation, index)`."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))
