from .errors import *
from .spectral import *
from .synth import *
from .estimators import *
from .diagnostics import *
from .whiten import *
from .harness import *
