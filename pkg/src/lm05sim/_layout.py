"""Shared layout of the per-round uniform draws and record columns.

Every backend (scalar reference, NumPy, compiled) reads the same uniforms
from the same slots, so a given seed yields one transcript regardless of
which backend runs it.
"""

U_PREP_BASIS = 0
U_PREP_BIT = 1
U_FWD = 2  # X kick, Y kick, baseline flip -> slots 2, 3, 4
U_MODE = 5
U_ALICE_CHOICE = 6  # CM basis or EM encoding bit
U_ALICE_MEAS = 7
U_ALICE_READOUT = 8  # replace, coin -> slots 8, 9
U_BWD = 10  # slots 10, 11, 12
U_BOB_MEAS = 13
U_BOB_READOUT = 14  # slots 14, 15
N_UNIFORMS = 16

# params vector consumed by the kernels
P_AXIS = 0  # 0 none, 1 Z, 2 X
P_PHI_F = 1
P_PHI_B = 2
P_DELTA = 3
P_XI = 4
P_FLIP_F = 5
P_FLIP_B = 6
P_CONTROL = 7
P_XI_ALL = 8
N_PARAMS = 9

# record columns (int8); -1 marks "not applicable"
C_PREP_BASIS = 0
C_PREP_BIT = 1
C_MODE = 2  # 0 CM, 1 EM
C_ALICE_BASIS = 3
C_ALICE_OUTCOME = 4
C_ENCODING = 5
C_BOB_OUTCOME = 6
N_COLUMNS = 7
