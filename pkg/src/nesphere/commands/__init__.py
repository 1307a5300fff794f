from .config import app as config_app
from .fit import eval_command, fit_command, scan_dims_command
from .geometry import features_command, overlap_command
from .mapping import candidates_command, emd_fit_command, map_command
from .space import neighbors_command, project2d_command
from .synth import synth_command
