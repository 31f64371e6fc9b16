"""Exception hierarchy shared by the owner, client and server toolchains."""


class MasseError(Exception):
    pass


class ConfigurationError(MasseError):
    """Unsupported parameter choice (e.g. a security level with no curve)."""


class FormatError(MasseError):
    """Truncated, corrupted or version-mismatched binary input."""


class ProtocolError(MasseError):
    """A frame or token that cannot be interpreted (as opposed to one that is refused)."""


class AuthorizationError(MasseError):
    """A client asked for something outside its authorized keyword set."""


class RegistrationError(MasseError):
    pass


class CapacityError(MasseError):
    """All dummy slots of a keyword are consumed; the index must be rebuilt."""


class NotFoundError(MasseError, KeyError):
    pass


class DesyncError(MasseError):
    """Owner and server disagree about the encrypted index (e.g. add to an unknown slot)."""
