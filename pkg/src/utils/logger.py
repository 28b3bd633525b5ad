import os
import logging


class Logger():
    """
        Create logger to save logs of degrade/restore/sweep runs
        Args:
            logs_dir: directory of the log file
            saved_fn: run name, the log file is logger_<saved_fn>.txt

        Returns:

        """

    def __init__(self, logs_dir, saved_fn):
        logger_fn = 'logger_{}.txt'.format(saved_fn)
        self.logger_path = os.path.join(logs_dir, logger_fn)

        self.logger = logging.getLogger('{}.{}'.format(__name__, os.path.abspath(self.logger_path)))
        self.logger.setLevel(logging.INFO)
        self.logger.propagate = False

        if not self.logger.handlers:
            formatter = logging.Formatter(
                '%(asctime)s: %(module)s.py - %(funcName)s(), at Line %(lineno)d:%(levelname)s:\n%(message)s')

            file_handler = logging.FileHandler(self.logger_path)
            file_handler.setLevel(logging.INFO)
            file_handler.setFormatter(formatter)

            stream_handler = logging.StreamHandler()
            stream_handler.setFormatter(formatter)

            self.logger.addHandler(file_handler)
            self.logger.addHandler(stream_handler)

    def info(self, message):
        self.logger.info(message, stacklevel=2)

    def warning(self, message):
        self.logger.warning(message, stacklevel=2)

    def error(self, message):
        self.logger.error(message, stacklevel=2)
