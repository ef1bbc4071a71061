package main

import (
	"fmt"
	str "strings"
)

import "os"

// Greet prints a greeting.
func Greet(name string) {
	fmt.Println(str.ToUpper(name))
}

func (s *Server) Run() error {
	/* start */
	return nil
}

func main() {
	Greet(os.Args[0])
}
