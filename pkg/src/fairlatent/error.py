"""Exception base shared by all fairlatent modules.

Every error carries a machine-readable `code` alongside its human
message, such that the CLI may report both.

"""


class FairLatentError(Exception):

    #: default machine-readable error code of the class
    code = 'error'

    def __init__(self, message, *args, code=None):
        super().__init__(message, *args)
        self.message = message
        if code is not None:
            self.code = code

    def __str__(self):
        return self.message


class ConfigError(FairLatentError):

    code = 'config'
