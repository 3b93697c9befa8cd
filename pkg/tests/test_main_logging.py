import os
import time
import logging
import tempfile
import unittest

from unittest import mock

from utils.logging_setup import LOG_FILE_ENV_KEY
from utils.logging_setup import cleanup_old_log_files
from utils.logging_setup import configure_runtime_logging
from utils.logging_setup import new_run_log_path
from utils.logging_setup import tag_scenario


class TestMainLogging(unittest.TestCase):
    """Tests for runtime log file utilities."""

    def tearDown(self) -> None:
        root_logger = logging.getLogger()
        for handler in list(root_logger.handlers):
            root_logger.removeHandler(handler)
            handler.close()

    def test_new_run_log_path_contains_prefix_and_pid(self) -> None:
        """Generated log path should include prefix and process id.

        Args:
            self: Test case instance.
        """

        with tempfile.TemporaryDirectory() as temp_dir:
            first = new_run_log_path(
                log_dir = temp_dir,
                log_prefix = "relcont"
            )
            time.sleep(0.001)
            second = new_run_log_path(
                log_dir = temp_dir,
                log_prefix = "relcont"
            )

            self.assertTrue(
                os.path.basename(first).startswith("relcont_")
            )
            self.assertTrue(
                os.path.basename(first).endswith(f"_{os.getpid()}.log")
            )
            self.assertNotEqual(first, second)

    def test_cleanup_old_log_files_keeps_latest_ten(self) -> None:
        """Cleanup should keep only the latest files under same prefix.

        Args:
            self: Test case instance.
        """

        with tempfile.TemporaryDirectory() as temp_dir:
            kept_indexes = set()
            for index in range(12):
                path = os.path.join(
                    temp_dir,
                    f"relcont_20260219_120000_{index}.log"
                )
                with open(path, "w", encoding = "utf-8") as file_obj:
                    file_obj.write("x")
                mtime = 1000 + index
                os.utime(path, (mtime, mtime))
                if index >= 2:
                    kept_indexes.add(index)

            other_path = os.path.join(temp_dir, "another_program.log")
            with open(other_path, "w", encoding = "utf-8") as file_obj:
                file_obj.write("y")

            cleanup_old_log_files(
                log_dir = temp_dir,
                log_prefix = "relcont",
                max_files = 10
            )

            remaining = sorted(
                filename
                for filename in os.listdir(temp_dir)
                if filename.startswith("relcont_")
                and filename.endswith(".log")
            )
            self.assertEqual(len(remaining), 10)
            remaining_indexes = {
                int(filename.rsplit("_", 1)[-1].replace(".log", ""))
                for filename in remaining
            }
            self.assertEqual(remaining_indexes, kept_indexes)
            self.assertTrue(os.path.exists(other_path))

    def test_configure_runtime_logging_exports_path(self) -> None:
        """Should create the run log file and export its path.

        Args:
            self: Test case instance.
        """

        with tempfile.TemporaryDirectory() as temp_dir:
            with mock.patch.dict(os.environ, {}, clear = False):
                log_path = configure_runtime_logging(log_dir = temp_dir, max_files = 5)
                logging.getLogger("relcont.test").info("hello")
                self.assertEqual(os.environ[LOG_FILE_ENV_KEY], log_path)
            self.assertTrue(os.path.isfile(log_path))
            self.assertTrue(os.path.basename(log_path).startswith("relcont_"))
            for handler in list(logging.getLogger().handlers):
                handler.flush()
            with open(log_path, "r", encoding = "utf-8") as fp:
                self.assertIn("hello", fp.read())
            self.tearDown()

    def test_run_file_keeps_debug_with_scenario_tag(self) -> None:
        """Should write DEBUG lines to the run file tagged with the scenario.

        Args:
            self: Test case instance.
        """

        with tempfile.TemporaryDirectory() as temp_dir:
            with mock.patch.dict(os.environ, {}, clear = False):
                log_path = configure_runtime_logging(log_dir = temp_dir, level = logging.WARNING)
                tag_scenario("plane_wave_vacuum")
                logging.getLogger("relcont.test").debug("level 1 norms")
                tag_scenario(None)
                logging.getLogger("relcont.test").debug("untagged")
            for handler in list(logging.getLogger().handlers):
                handler.flush()
            with open(log_path, "r", encoding = "utf-8") as fp:
                text = fp.read()
            self.assertIn("[plane_wave_vacuum] level 1 norms", text)
            self.assertIn("[-] untagged", text)
            self.tearDown()


if __name__ == "__main__":
    unittest.main()
