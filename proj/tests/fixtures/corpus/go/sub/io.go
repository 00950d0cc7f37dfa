package sub

import "os"

func init() {
	_ = os.Args
}

func Read(path string) ([]byte, error) {
	return os.ReadFile(path)
}
