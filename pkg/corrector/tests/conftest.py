import numpy as np
import pytest


@pytest.fixture(scope="session")
def tiny_archive(tmp_path_factory):
    """A small training archive built with the scattering toolkit."""
    from pswfscat import datasets
    from pswfscat.grids import DirectionSet, PolarGrid

    out = tmp_path_factory.mktemp("archive")
    contrasts = datasets.gen_disks(7, 8)
    dirs = DirectionSet.uniform(104)
    datasets.build_samples(contrasts, 16.0, dirs, dirs, PolarGrid(104, 56),
                           out, recipe="disks", seed=7)
    return out
