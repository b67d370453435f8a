from .files import tables_dir, sample_config  # noqa: F401
from .scenarios import tw_table, default_scenario, small_config_file  # noqa: F401

import eddyprobe
import numpy as np
import pandas as pd
import pydantic
import scipy
import sys
import platform


def pytest_configure(config):
    print('\n' + '-=' * 38)
    print("eddyprobe version:     %s" % eddyprobe.__version__)
    print("NumPy version:         %s" % np.__version__)
    print("SciPy version:         %s" % scipy.__version__)
    print("pandas version:        %s" % pd.__version__)
    print("pydantic version:      %s" % pydantic.VERSION)
    print('Python version:        %s' % sys.version)
    print('Platform:              %s' % platform.platform())
    print('Rootdir:               %s' % config.rootdir)
    print('-=' * 38)
