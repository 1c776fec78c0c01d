"""Worked families with their published baskets and plurigenera."""

import os
from dataclasses import dataclass
from typing import List, Optional

from .formats import FormatFamily, ci_family, gr_family, segre_family

MODELS_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..', 'data', 'models'))
SEGRE_MODEL = os.path.join(MODELS_DIR, 'segre_example.txt')


@dataclass(frozen=True)
class WorkedFamily:
    name: str
    family: FormatFamily
    basket: str
    h0: Optional[List[int]] = None
    type: str = 'K0'


WORKED_FAMILIES = (
    WorkedFamily(
        'ci2-extreme', ci_family((36, 40), (5, 5, 7, 8, 9, 12, 31)),
        '1/3(1,2,2,2), 8x1/5(2,2,3,4), 1/7(2,3,5,5), 1/31(5,7,8,12)', [0, 0, 0, 0]),
    WorkedFamily(
        'ci3-extreme', ci_family((16, 18, 20), (4, 5, 5, 6, 7, 8, 9, 11)),
        '1/3(1,2,2,2), 4x1/5(1,2,4,4), 1/7(1,4,5,5), 1/11(4,5,6,8)', [0, 0, 0]),
    WorkedFamily(
        'gr25-empty', gr_family(('-1/2', '7/2', '11/2', '17/2', '37/2'), (2, 3, 5, 7, 8, 9, 11, 27)),
        '3x1/3(1,2,2,2), 1/5(1,3,3,4), 1/7(2,2,5,6), 1/11(2,5,7,9), 1/27(2,7,8,11)', [0]),
    WorkedFamily(
        'p2p2-empty', segre_family((0, 1, 2), (3, 5, 10), (2, 3, 3, 3, 4, 5, 5, 7, 11)),
        '14x1/3(1,2,2,2), 1/5(2,3,3,3), 1/7(2,3,5,5), 1/11(2,3,3,4)', [0]),
    WorkedFamily(
        'gr25-k2', gr_family(('1/2', '1/2', '1/2', '21/2', '21/2'), (1, 1, 1, 3, 7, 11, 11, 11)),
        '1/3(1,2,2,2), 1/7(3,4,4,4), 3x1/11(1,1,3,7)', [3], 'K2'),
    WorkedFamily(
        'p2p2-k2', segre_family((0, 0, 10), (1, 1, 11), (1, 1, 1, 1, 3, 7, 11, 11, 11)),
        '1/3(1,2,2,2), 1/7(3,4,4,4), 2x1/11(1,1,3,7)', [4], 'K2'),
)


def worked(name: str) -> WorkedFamily:
    for example in WORKED_FAMILIES:
        if example.name == name:
            return example
    raise KeyError(name)
