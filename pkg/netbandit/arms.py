from enum import IntEnum


class Arm(IntEnum):
    CONTROL = 0
    TREATMENT = 1

    @property
    def complement(self) -> "Arm":
        return Arm(1 - self.value)


# Marker stored in arm arrays for nodes that have not been assigned yet.
UNASSIGNED = -1
