# --------------------------------------------------------------------------- #
#   annotations.py                                                            #
#                                                                             #
#   Copyright © 2024, the detkit authors.                                     #
#                                                                             #
#   Licensed under the Apache License, Version 2.0 (the "License");           #
#   you may not use this file except in compliance with the License.          #
#   You may obtain a copy of the License at:                                  #
#       http://www.apache.org/licenses/LICENSE-2.0                            #
#                                                                             #
#   Unless required by applicable law or agreed to in writing, software       #
#   distributed under the License is distributed on an "AS IS" BASIS,         #
#   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.  #
#   See the License for the specific language governing permissions and       #
#   limitations under the License.                                            #
# --------------------------------------------------------------------------- #


from fractions import Fraction
from typing import Hashable
from typing import Tuple
from typing import Union


# Exact rationals for finite models in exact mode, floats everywhere else.
# +inf (a float) shows up as a likelihood ratio in both modes.
Probability = Union[Fraction, float]

# One probability per action, indexed by action label - 1.
Law = Tuple[Probability, ...]

Symbol = Hashable

# Action labels are 1-based, as in u^i ∈ {1, ..., |U|}.
Actions = Tuple[int, ...]

# σ(1), ..., σ(N), 1-based.
Permutation = Tuple[int, ...]
