class InputError(ValueError):
    """Malformed market, unknown id, or a violated precondition."""


class SizeGuardError(InputError):
    """An exhaustive routine was asked to enumerate beyond its bound."""

    def __init__(self, what: str, size: int, bound: int):
        super().__init__(
            f"{what}: size {size} exceeds the enumeration bound {bound} "
            f"(2^{size} = {2 ** size} candidates)"
        )
        self.size = size
        self.bound = bound


def guard(what: str, size: int, bound: int) -> None:
    if size > bound:
        raise SizeGuardError(what, size, bound)
